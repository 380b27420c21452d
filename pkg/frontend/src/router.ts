/** Path-based routes, deep-linkable and refresh-safe.
 *
 * /                      workspace (or login)
 * /login                 token entry
 * /search?q=&community=  search results
 * /upload                upload wizard
 * /records/:id[?token=]  record page (share-link token honored)
 * /records/:id/v/:n      record page focused on one version
 */

export type Route =
  | { kind: "workspace" }
  | { kind: "login" }
  | { kind: "search"; q: string; community: string; type: string; sort: string }
  | { kind: "upload" }
  | { kind: "record"; recordId: string; versionIndex: number | null; linkToken: string | null };

export function parseRoute(pathname: string, search: string): Route {
  const params = new URLSearchParams(search);
  const parts = pathname.replace(/\/+$/, "").split("/").filter(Boolean);

  if (parts.length === 0) return { kind: "workspace" };
  if (parts[0] === "login") return { kind: "login" };
  if (parts[0] === "upload") return { kind: "upload" };
  if (parts[0] === "search") {
    return {
      kind: "search",
      q: params.get("q") ?? "",
      community: params.get("community") ?? "",
      type: params.get("type") ?? "",
      sort: params.get("sort") ?? "newest",
    };
  }
  if (parts[0] === "records" && parts.length >= 2) {
    const versionIndex = parts.length >= 4 && parts[2] === "v" ? Number(parts[3]) : null;
    return {
      kind: "record",
      recordId: parts[1],
      versionIndex: Number.isFinite(versionIndex) ? versionIndex : null,
      linkToken: params.get("token"),
    };
  }
  return { kind: "workspace" };
}

export function routePath(route: Route): string {
  switch (route.kind) {
    case "workspace":
      return "/";
    case "login":
      return "/login";
    case "upload":
      return "/upload";
    case "search": {
      const params = new URLSearchParams();
      if (route.q) params.set("q", route.q);
      if (route.community) params.set("community", route.community);
      if (route.type) params.set("type", route.type);
      if (route.sort && route.sort !== "newest") params.set("sort", route.sort);
      const query = params.toString();
      return `/search${query ? `?${query}` : ""}`;
    }
    case "record": {
      let path = `/records/${route.recordId}`;
      if (route.versionIndex !== null) path += `/v/${route.versionIndex}`;
      if (route.linkToken) path += `?token=${route.linkToken}`;
      return path;
    }
  }
}
