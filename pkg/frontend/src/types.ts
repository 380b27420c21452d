/** Payload shapes of the archive REST API. */

export interface Affiliation {
  name: string;
  ror?: string | null;
}

export interface Author {
  name: string;
  orcid?: string | null;
  affiliations: Affiliation[];
}

export interface AnnotationAttachment {
  label: string;
  document: string;
  media_type: string;
}

export interface Metadata {
  title: string;
  license: string;
  description: string;
  keywords: string[];
  authors: Author[];
  resource_type: string;
  publication_date: string;
  annotations: AnnotationAttachment[];
}

export interface FileEntry {
  name: string;
  size: number;
  checksum: string;
}

export interface VersionRepresentation {
  record_id: string;
  version_id: string;
  version_index: number;
  state: "draft" | "shared";
  tier: "none" | "community" | "consortium";
  community: string | null;
  owner: string;
  created_at: string;
  shared_at: string | null;
  metadata: Metadata;
  files: FileEntry[];
}

export interface VersionSummary {
  version_id: string;
  version_index: number;
  state: "draft" | "shared";
  tier: string;
  community: string | null;
  title: string;
  created_at: string;
  shared_at: string | null;
}

export interface SearchItem {
  version_id: string;
  record_id: string;
  title: string;
  keywords: string[];
  authors: string[];
  community: string | null;
  tier: string;
  state: string;
  shared_at: string | null;
  owner: string;
}

export interface SearchPage {
  items: SearchItem[];
  total: number;
  page: number;
  size: number;
}

export interface Community {
  slug: string;
  display_name: string;
  kind: "project" | "umbrella";
}

export interface UsageAggregate {
  unique_views: number;
  unique_downloads: number;
  views_by_country: Record<string, number>;
  downloads_by_country: Record<string, number>;
  downloads_by_file: Record<string, number>;
  top_referrer_domains: [string, number][];
}

export interface RecordStats {
  record_id: string;
  cumulative: UsageAggregate;
  versions: { version_id: string; version_index: number; stats: UsageAggregate }[];
}

export interface ShareLink {
  token: string;
  permission: "view" | "edit";
  url: string;
  created_at: string;
  expires_at: string | null;
}

export interface CurrentUser {
  user_id: string;
  email: string;
  memberships: string[];
}

export interface FieldError {
  field: string;
  reason: string;
}
