/** Client-side mirror of the server's metadata validation, for
 * responsive form feedback. The server report stays authoritative. */

import type { FieldError, Metadata } from "./types.js";

export const BUILTIN_LICENSES = ["CC-BY-4.0", "CC0-1.0", "GPL-3.0", "MIT", "bm-2030"];

export const RESOURCE_TYPES = ["dataset", "software", "publication", "other"];

const ORCID_PATTERN = /^\d{4}-\d{4}-\d{4}-\d{3}[\dX]$/;
const ROR_PATTERN = /^0[a-z0-9]{6}[0-9]{2}$/;

/** ISO 7064 MOD 11-2 check character over a 15-digit base. */
export function orcidCheckChar(base15: string): string {
  let total = 0;
  for (const ch of base15) {
    total = (total + Number(ch)) * 2;
  }
  const result = (12 - (total % 11)) % 11;
  return result === 10 ? "X" : String(result);
}

export function orcidValid(value: string): boolean {
  if (!ORCID_PATTERN.test(value)) return false;
  const compact = value.replace(/-/g, "");
  return orcidCheckChar(compact.slice(0, 15)) === compact[15];
}

export function rorValid(value: string): boolean {
  return ROR_PATTERN.test(value);
}

export function validateMetadata(metadata: Partial<Metadata>): FieldError[] {
  const issues: FieldError[] = [];
  if (!metadata.title || !metadata.title.trim()) {
    issues.push({ field: "title", reason: "must not be empty" });
  }
  if (!metadata.license) {
    issues.push({ field: "license", reason: "missing" });
  }
  if (metadata.resource_type && !RESOURCE_TYPES.includes(metadata.resource_type)) {
    issues.push({ field: "resource_type", reason: "unknown resource type" });
  }
  const seen = new Set<string>();
  (metadata.keywords ?? []).forEach((keyword, i) => {
    const folded = keyword.trim().toLowerCase();
    if (seen.has(folded)) {
      issues.push({ field: `keywords[${i}]`, reason: `duplicate keyword: ${keyword}` });
    }
    seen.add(folded);
  });
  (metadata.authors ?? []).forEach((author, i) => {
    if (!author.name || !author.name.trim()) {
      issues.push({ field: `authors[${i}].name`, reason: "must not be empty" });
    }
    if (author.orcid) {
      if (!ORCID_PATTERN.test(author.orcid)) {
        issues.push({ field: `authors[${i}].orcid`, reason: "malformed identifier" });
      } else if (!orcidValid(author.orcid)) {
        issues.push({ field: `authors[${i}].orcid`, reason: "checksum mismatch" });
      }
    }
    (author.affiliations ?? []).forEach((affiliation, j) => {
      if (affiliation.ror && !rorValid(affiliation.ror)) {
        issues.push({
          field: `authors[${i}].affiliations[${j}].ror`,
          reason: "malformed identifier",
        });
      }
    });
  });
  (metadata.annotations ?? []).forEach((annotation, i) => {
    try {
      JSON.parse(annotation.document);
    } catch {
      issues.push({ field: `annotations[${i}].document`, reason: "not well-formed JSON" });
    }
  });
  return issues;
}
