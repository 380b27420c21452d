/** Record page: metadata, files, version navigator, usage statistics,
 * export buttons, annotations viewer, and the share dialog.
 *
 * Works both for signed-in users and for anonymous share-link visitors
 * (?token=), where it renders read-only. Action buttons are enabled
 * optimistically; the server's denial is surfaced as-is. */

import { ApiClient, ApiError } from "../api.js";
import { formatBytes, formatDate, tierBadge } from "../format.js";
import { badge, clear, copyToClipboard, el, errorBanner } from "../ui.js";
import type { App } from "../main.js";
import type { RecordStats, UsageAggregate, VersionRepresentation } from "../types.js";

export async function renderRecord(
  app: App,
  container: HTMLElement,
  recordId: string,
  versionIndex: number | null,
  linkToken: string | null,
): Promise<void> {
  clear(container);
  const client = linkToken
    ? new ApiClient({
        baseUrl: app.baseUrl,
        bearerToken: app.session.client.bearerToken,
        linkToken,
        transport: app.transport,
      })
    : app.session.client;

  let version: VersionRepresentation;
  try {
    version = await client.getRecord(recordId);
  } catch (error) {
    const message =
      error instanceof ApiError && error.status === 404
        ? "Record not found, or you do not have access to it."
        : `Cannot load record: ${(error as Error).message}`;
    container.append(errorBanner(message));
    return;
  }

  const section = el("section", { class: "record", "data-record": recordId });
  const notice = el("div", { class: "record-notice" });
  section.append(notice);

  // -- header ---------------------------------------------------------------
  const md = version.metadata;
  section.append(
    el(
      "header",
      { class: "record-header" },
      el("h1", { id: "record-title" }, md.title),
      badge(
        tierBadge(version.state, version.tier, version.community),
        version.state === "draft"
          ? "badge-draft"
          : version.tier === "consortium"
            ? "badge-consortium"
            : "badge-community",
      ),
      el(
        "div",
        { class: "record-meta" },
        `${version.version_id} · ${md.resource_type} · ${md.license} · by ${version.owner}` +
          ` · ${formatDate(version.shared_at ?? version.created_at)}`,
      ),
    ),
  );
  if (md.description) section.append(el("p", { class: "record-description" }, md.description));
  if (md.keywords.length) {
    section.append(
      el(
        "div",
        { class: "record-keywords" },
        ...md.keywords.map((keyword) => badge(keyword, "badge-keyword")),
      ),
    );
  }
  if (md.authors.length) {
    section.append(
      el(
        "ul",
        { class: "record-authors" },
        ...md.authors.map((author) =>
          el(
            "li",
            {},
            author.name,
            author.orcid ? el("span", { class: "pid" }, ` ORCID ${author.orcid}`) : null,
            ...author.affiliations.map((aff) =>
              el("span", { class: "affiliation" }, ` · ${aff.name}${aff.ror ? ` (ROR ${aff.ror})` : ""}`),
            ),
          ),
        ),
      ),
    );
  }

  // -- files -----------------------------------------------------------------
  const filesBlock = el("div", { class: "record-files" }, el("h2", {}, "Files"));
  if (version.files.length) {
    const list = el("ul", { class: "file-list" });
    for (const file of version.files) {
      list.append(
        el(
          "li",
          {},
          el("a", { href: client.downloadUrl(recordId, file.name), download: file.name }, file.name),
          el("span", { class: "file-size" }, ` ${formatBytes(file.size)}`),
          el("span", { class: "file-checksum" }, ` ${file.checksum.slice(0, 18)}…`),
        ),
      );
    }
    filesBlock.append(list);
  } else {
    filesBlock.append(el("p", { class: "empty" }, "No files in this version."));
  }
  section.append(filesBlock);

  // -- semantic annotations -----------------------------------------------------
  if (md.annotations.length) {
    const block = el("div", { class: "record-annotations" }, el("h2", {}, "Semantic annotations"));
    for (const annotation of md.annotations) {
      let pretty = annotation.document;
      try {
        pretty = JSON.stringify(JSON.parse(annotation.document), null, 2);
      } catch {
        // leave the raw text
      }
      const blobUrl = `data:${annotation.media_type};charset=utf-8,${encodeURIComponent(annotation.document)}`;
      block.append(
        el(
          "details",
          { class: "annotation" },
          el(
            "summary",
            {},
            annotation.label,
            " ",
            badge("JSON-LD", "badge-jsonld"),
            " ",
            el("a", { href: blobUrl, download: `${annotation.label}.jsonld` }, "download"),
          ),
          el("pre", { class: "annotation-doc" }, pretty),
        ),
      );
    }
    section.append(block);
  }

  // -- exports ----------------------------------------------------------------
  section.append(
    el(
      "div",
      { class: "record-exports" },
      el("h2", {}, "Export"),
      ...["json", "json-ld", "datacite-xml", "dublincore-xml"].map((format) =>
        el(
          "a",
          { class: "export-button", href: client.exportUrl(recordId, format), download: true },
          format,
        ),
      ),
    ),
  );

  // -- actions (optimistic; server decides) --------------------------------------
  const actions = el("div", { class: "record-actions" });
  if (app.session.user) {
    actions.append(
      el("button", { id: "open-share-dialog", onclick: () => openShareDialog() }, "Share…"),
      el(
        "button",
        {
          id: "new-version",
          onclick: async () => {
            clear(notice);
            try {
              await client.newVersion(recordId, true);
              app.refresh();
            } catch (error) {
              notice.append(errorBanner((error as Error).message));
            }
          },
        },
        "New version",
      ),
    );
  }
  section.append(actions);

  // -- share dialog -----------------------------------------------------------------
  const dialog = el("div", { class: "share-dialog", id: "share-dialog", hidden: true });
  section.append(dialog);

  async function openShareDialog(): Promise<void> {
    dialog.hidden = false;
    clear(dialog);
    const dialogNotice = el("div", {});
    const communitySelect = el("select", { id: "share-community" });
    try {
      const { communities } = await app.session.client.communities();
      for (const community of communities.filter((c) => c.kind === "project")) {
        communitySelect.append(el("option", { value: community.slug }, community.display_name));
      }
    } catch {
      // leave empty; share attempt will surface the server error
    }
    const linkResult = el("div", { class: "link-result", id: "link-result" });

    dialog.append(
      el("h2", {}, "Share"),
      dialogNotice,
      el(
        "div",
        { class: "share-tier" },
        el("h3", {}, "With a community"),
        communitySelect,
        el(
          "button",
          {
            id: "share-community-btn",
            onclick: async () => {
              clear(dialogNotice);
              try {
                await client.share(recordId, "community", (communitySelect as HTMLSelectElement).value);
                app.refresh();
              } catch (error) {
                dialogNotice.append(errorBanner((error as Error).message));
              }
            },
          },
          "Share with community",
        ),
        el(
          "button",
          {
            id: "share-consortium-btn",
            onclick: async () => {
              clear(dialogNotice);
              try {
                await client.share(recordId, "consortium");
                app.refresh();
              } catch (error) {
                dialogNotice.append(errorBanner((error as Error).message));
              }
            },
          },
          "Share with the whole consortium",
        ),
      ),
      el(
        "div",
        { class: "share-links" },
        el("h3", {}, "Share link"),
        ...(["view", "edit"] as const).map((permission) =>
          el(
            "button",
            {
              id: `mint-${permission}-link`,
              onclick: async () => {
                clear(dialogNotice);
                clear(linkResult);
                try {
                  const link = await client.mintLink(recordId, permission);
                  const urlInput = el("input", {
                    type: "text",
                    class: "link-url",
                    id: "link-url",
                    value: link.url,
                    readonly: true,
                  });
                  linkResult.append(
                    badge(permission, "badge-permission"),
                    urlInput,
                    el(
                      "button",
                      {
                        id: "copy-link",
                        onclick: async () => {
                          const copied = await copyToClipboard(link.url, urlInput as HTMLInputElement);
                          (linkResult.querySelector("#copy-link") as HTMLElement).textContent =
                            copied ? "copied" : "copy manually";
                        },
                      },
                      "copy",
                    ),
                  );
                } catch (error) {
                  dialogNotice.append(errorBanner((error as Error).message));
                }
              },
            },
            `Create ${permission} link`,
          ),
        ),
        linkResult,
      ),
      el("button", { id: "close-share-dialog", onclick: () => (dialog.hidden = true) }, "Close"),
    );
  }

  // -- versions + stats ----------------------------------------------------------
  const versionsBlock = el("div", { class: "record-versions" }, el("h2", {}, "Versions"));
  const statsBlock = el("div", { class: "record-stats" }, el("h2", {}, "Usage"));
  section.append(versionsBlock, statsBlock);
  container.append(section);

  try {
    const { versions } = await client.listVersions(recordId);
    const list = el("ul", { class: "version-list" });
    for (const summary of versions) {
      const focused = versionIndex === summary.version_index;
      list.append(
        el(
          "li",
          { class: focused ? "version focused" : "version" },
          el(
            "a",
            {
              href: `/records/${recordId}/v/${summary.version_index}`,
              onclick: (event) => {
                event.preventDefault();
                app.navigate({
                  kind: "record",
                  recordId,
                  versionIndex: summary.version_index,
                  linkToken,
                });
              },
            },
            `v${summary.version_index}`,
          ),
          ` ${summary.state === "draft" ? "draft" : `shared ${formatDate(summary.shared_at)}`}`,
        ),
      );
    }
    versionsBlock.append(list);
  } catch (error) {
    versionsBlock.append(errorBanner((error as Error).message));
  }

  try {
    const stats = await client.recordStats(recordId);
    statsBlock.append(statsTable(stats, versionIndex));
  } catch (error) {
    statsBlock.append(errorBanner((error as Error).message));
  }
}

function aggregateCells(aggregate: UsageAggregate): HTMLElement[] {
  return [
    el("td", { class: "stat-views" }, String(aggregate.unique_views)),
    el("td", { class: "stat-downloads" }, String(aggregate.unique_downloads)),
  ];
}

function statsTable(stats: RecordStats, focusedIndex: number | null): HTMLElement {
  const table = el(
    "table",
    { class: "stats-table", id: "stats-table" },
    el(
      "thead",
      {},
      el("tr", {}, el("th", {}, "scope"), el("th", {}, "unique views"), el("th", {}, "unique downloads")),
    ),
  );
  const body = el("tbody", {});
  for (const entry of stats.versions) {
    body.append(
      el(
        "tr",
        {
          class: focusedIndex === entry.version_index ? "focused" : "",
          "data-version": String(entry.version_index),
        },
        el("td", {}, `v${entry.version_index}`),
        ...aggregateCells(entry.stats),
      ),
    );
  }
  body.append(
    el(
      "tr",
      { class: "cumulative", id: "stats-cumulative" },
      el("td", {}, "all versions"),
      ...aggregateCells(stats.cumulative),
    ),
  );
  table.append(body);
  return table;
}
