/** Upload wizard state machine: metadata -> files -> review -> share.
 *
 * Pure state + transitions; the view layer renders it and the submit
 * step drives the API. Per-file progress and the running total size
 * are tracked here so the UI can show both.
 */

import type { ApiClient, UploadProgress } from "./api.js";
import type { FieldError, Metadata } from "./types.js";
import { validateMetadata } from "./validate.js";

export const STEPS = ["metadata", "files", "review", "share"] as const;
export type Step = (typeof STEPS)[number];

export interface StagedFile {
  name: string;
  size: number;
  blob: Blob;
  progress: number; // 0..1
  uploaded: boolean;
}

export interface ShareChoice {
  mode: "none" | "community" | "consortium";
  community?: string;
}

export class UploadWizard {
  step: Step = "metadata";
  metadata: Partial<Metadata> = {
    title: "",
    license: "",
    description: "",
    keywords: [],
    authors: [],
    resource_type: "dataset",
  };
  files: StagedFile[] = [];
  share: ShareChoice = { mode: "none" };
  errors: FieldError[] = [];

  recordId: string | null = null;

  validateMetadataStep(): boolean {
    this.errors = validateMetadata(this.metadata);
    return this.errors.length === 0;
  }

  next(): boolean {
    const index = STEPS.indexOf(this.step);
    if (this.step === "metadata" && !this.validateMetadataStep()) return false;
    if (index < STEPS.length - 1) {
      this.step = STEPS[index + 1];
      return true;
    }
    return false;
  }

  back(): void {
    const index = STEPS.indexOf(this.step);
    if (index > 0) this.step = STEPS[index - 1];
  }

  /** Stage files; names must stay unique within the draft manifest. */
  addFiles(incoming: { name: string; size: number; blob: Blob }[]): FieldError[] {
    const rejected: FieldError[] = [];
    for (const file of incoming) {
      if (this.files.some((f) => f.name === file.name)) {
        rejected.push({ field: file.name, reason: "duplicate file name" });
        continue;
      }
      if (file.name.includes("/") || file.name.includes("\\") || file.name.startsWith("..")) {
        rejected.push({ field: file.name, reason: "invalid file name" });
        continue;
      }
      this.files.push({ ...file, progress: 0, uploaded: false });
    }
    return rejected;
  }

  removeFile(name: string): void {
    this.files = this.files.filter((f) => f.name !== name);
  }

  totalSize(): number {
    return this.files.reduce((sum, f) => sum + f.size, 0);
  }

  uploadedSize(): number {
    return this.files.reduce((sum, f) => sum + Math.round(f.progress * f.size), 0);
  }

  fieldError(field: string): string | null {
    const hit = this.errors.find((e) => e.field === field);
    return hit ? hit.reason : null;
  }

  /** Create the draft, upload every staged file, optionally share.
   * Server-side validation errors land in `errors` and rethrow. */
  async submit(api: ApiClient, onProgress?: (p: UploadProgress) => void): Promise<string> {
    this.errors = [];
    try {
      if (this.recordId === null) {
        const draft = await api.createDraft(this.metadata);
        this.recordId = draft.record_id;
      }
      for (const file of this.files) {
        if (file.uploaded) continue;
        await api.uploadFile(this.recordId, file, file.blob, (p) => {
          file.progress = p.total > 0 ? p.sent / p.total : 1;
          onProgress?.(p);
        });
        file.progress = 1;
        file.uploaded = true;
      }
      if (this.share.mode === "community") {
        await api.share(this.recordId, "community", this.share.community);
      } else if (this.share.mode === "consortium") {
        await api.share(this.recordId, "consortium");
      }
      return this.recordId;
    } catch (error: any) {
      if (error && Array.isArray(error.fieldErrors) && error.fieldErrors.length) {
        this.errors = error.fieldErrors;
      }
      throw error;
    }
  }
}
