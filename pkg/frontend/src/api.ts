/** Typed client for the archive REST API.
 *
 * Carries the Bearer token when present and a share-link token as the
 * `?token=` query parameter. Performs no authorization logic of its
 * own: every call is attempted and server denials surface as ApiError.
 */

import type {
  Community,
  CurrentUser,
  FieldError,
  Metadata,
  RecordStats,
  SearchPage,
  ShareLink,
  VersionRepresentation,
  VersionSummary,
} from "./types.js";

export class ApiError extends Error {
  status: number;
  code: string;
  fieldErrors: FieldError[];

  constructor(status: number, code: string, message: string, fieldErrors: FieldError[] = []) {
    super(message);
    this.status = status;
    this.code = code;
    this.fieldErrors = fieldErrors;
  }
}

export interface UploadProgress {
  name: string;
  sent: number;
  total: number;
}

export interface ApiClientOptions {
  baseUrl?: string;
  bearerToken?: string | null;
  linkToken?: string | null;
  /** "xhr" gives real per-file progress events; "fetch" is the fallback. */
  transport?: "xhr" | "fetch";
}

export class ApiClient {
  baseUrl: string;
  bearerToken: string | null;
  linkToken: string | null;
  transport: "xhr" | "fetch";

  constructor(options: ApiClientOptions = {}) {
    this.baseUrl = (options.baseUrl ?? "").replace(/\/$/, "");
    this.bearerToken = options.bearerToken ?? null;
    this.linkToken = options.linkToken ?? null;
    this.transport =
      options.transport ?? (typeof XMLHttpRequest === "undefined" ? "fetch" : "xhr");
  }

  url(path: string, params: Record<string, string | number | undefined> = {}): string {
    const search = new URLSearchParams();
    for (const [key, value] of Object.entries(params)) {
      if (value !== undefined && value !== "") search.set(key, String(value));
    }
    if (this.linkToken) search.set("token", this.linkToken);
    const query = search.toString();
    return `${this.baseUrl}${path}${query ? `?${query}` : ""}`;
  }

  private headers(extra: Record<string, string> = {}): Record<string, string> {
    const headers: Record<string, string> = { ...extra };
    if (this.bearerToken) headers["Authorization"] = `Bearer ${this.bearerToken}`;
    return headers;
  }

  private async handle<T>(response: Response): Promise<T> {
    if (response.ok) {
      if (response.status === 204) return undefined as T;
      return (await response.json()) as T;
    }
    let code = "error";
    let message = `HTTP ${response.status}`;
    let fieldErrors: FieldError[] = [];
    try {
      const body = await response.json();
      code = body.code ?? code;
      message = body.message ?? message;
      fieldErrors = body.field_errors ?? [];
    } catch {
      // non-JSON error body: keep the defaults
    }
    throw new ApiError(response.status, code, message, fieldErrors);
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: this.headers() };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
      (init.headers as Record<string, string>)["Content-Type"] = "application/json";
    }
    return this.handle<T>(await fetch(this.url(path), init));
  }

  // -- session -----------------------------------------------------------

  me(): Promise<CurrentUser> {
    return this.request("GET", "/api/user/me");
  }

  mintApiToken(label: string): Promise<{ token: string; label: string }> {
    return this.request("POST", "/api/user/tokens", { label });
  }

  // -- records -----------------------------------------------------------

  createDraft(metadata: Partial<Metadata>): Promise<VersionRepresentation> {
    return this.request("POST", "/api/records", metadata);
  }

  getRecord(recordId: string): Promise<VersionRepresentation> {
    return this.request("GET", `/api/records/${recordId}`);
  }

  listVersions(recordId: string): Promise<{ versions: VersionSummary[] }> {
    return this.request("GET", `/api/records/${recordId}/versions`);
  }

  updateMetadata(recordId: string, metadata: Partial<Metadata>): Promise<VersionRepresentation> {
    return this.request("PUT", `/api/records/${recordId}/draft`, metadata);
  }

  deleteDraft(recordId: string): Promise<void> {
    return this.request("DELETE", `/api/records/${recordId}/draft`);
  }

  share(recordId: string, tier: "community" | "consortium", community?: string) {
    return this.request<VersionRepresentation>(
      "POST",
      `/api/records/${recordId}/actions/share`,
      community ? { tier, community } : { tier },
    );
  }

  newVersion(recordId: string, importFiles: boolean): Promise<VersionRepresentation> {
    return this.request("POST", `/api/records/${recordId}/versions`, {
      import_files: importFiles,
    });
  }

  deleteFile(recordId: string, name: string): Promise<void> {
    return this.request("DELETE", `/api/records/${recordId}/draft/files/${encodeURIComponent(name)}`);
  }

  // -- file upload with progress ------------------------------------------

  async uploadFile(
    recordId: string,
    file: { name: string; size: number },
    blob: Blob,
    onProgress?: (p: UploadProgress) => void,
  ): Promise<{ name: string; size: number; checksum: string }> {
    const path = `/api/records/${recordId}/draft/files/${encodeURIComponent(file.name)}`;
    onProgress?.({ name: file.name, sent: 0, total: file.size });
    if (this.transport === "xhr") {
      return new Promise((resolve, reject) => {
        const xhr = new XMLHttpRequest();
        xhr.open("PUT", this.url(path));
        for (const [key, value] of Object.entries(this.headers())) {
          xhr.setRequestHeader(key, value);
        }
        xhr.upload.onprogress = (event) => {
          onProgress?.({ name: file.name, sent: event.loaded, total: file.size });
        };
        xhr.onerror = () => reject(new ApiError(0, "network", "upload failed"));
        xhr.onload = () => {
          let body: any = {};
          try {
            body = JSON.parse(xhr.responseText || "{}");
          } catch {
            // fall through with an empty body
          }
          if (xhr.status >= 400) {
            reject(
              new ApiError(
                xhr.status,
                body.code ?? "error",
                body.message ?? `HTTP ${xhr.status}`,
                body.field_errors ?? [],
              ),
            );
          } else {
            onProgress?.({ name: file.name, sent: file.size, total: file.size });
            resolve(body);
          }
        };
        xhr.send(blob);
      });
    }
    // Buffer first: DOM Blob flavors (jsdom included) don't always carry
    // the stream() method the runtime's fetch wants.
    const payload = new Uint8Array(await blob.arrayBuffer());
    const response = await fetch(this.url(path), {
      method: "PUT",
      headers: this.headers(),
      body: payload,
    });
    const entry = await this.handle<{ name: string; size: number; checksum: string }>(response);
    onProgress?.({ name: file.name, sent: file.size, total: file.size });
    return entry;
  }

  downloadUrl(recordId: string, name: string): string {
    return this.url(`/api/records/${recordId}/files/${encodeURIComponent(name)}`);
  }

  exportUrl(recordId: string, format: string): string {
    return this.url(`/api/records/${recordId}/export/${format}`);
  }

  // -- links, stats, search, communities -------------------------------------

  mintLink(recordId: string, permission: "view" | "edit", expiresAt?: string) {
    return this.request<ShareLink>(
      "POST",
      `/api/records/${recordId}/links`,
      expiresAt ? { permission, expires_at: expiresAt } : { permission },
    );
  }

  revokeLink(token: string): Promise<void> {
    return this.request("DELETE", `/api/links/${token}`);
  }

  recordStats(recordId: string): Promise<RecordStats> {
    return this.request("GET", `/api/records/${recordId}/stats`);
  }

  search(params: {
    q?: string;
    community?: string;
    type?: string;
    owner?: "me";
    sort?: string;
    page?: number;
    size?: number;
  }): Promise<SearchPage> {
    const response = fetch(this.url("/api/search", params), { headers: this.headers() });
    return response.then((r) => this.handle<SearchPage>(r));
  }

  communities(): Promise<{ communities: Community[] }> {
    return this.request("GET", "/api/communities");
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/api/healthz");
  }
}
