/** Shared result-list rendering for workspace and search pages. */

import { formatDate, tierBadge } from "../format.js";
import { badge, el } from "../ui.js";
import type { App } from "../main.js";
import type { SearchItem } from "../types.js";

export function resultList(app: App, items: SearchItem[]): HTMLElement {
  if (!items.length) {
    return el("p", { class: "empty" }, "No records.");
  }
  const list = el("ul", { class: "result-list" });
  for (const item of items) {
    const stateBadge =
      item.state === "draft" ? badge("draft", "badge-draft") : badge(
        tierBadge(item.state, item.tier, item.community),
        item.tier === "consortium" ? "badge-consortium" : "badge-community",
      );
    list.append(
      el(
        "li",
        { class: "result-item", "data-record": item.record_id },
        el(
          "a",
          {
            href: `/records/${item.record_id}`,
            class: "result-title",
            onclick: (event) => {
              event.preventDefault();
              app.navigate({
                kind: "record",
                recordId: item.record_id,
                versionIndex: null,
                linkToken: null,
              });
            },
          },
          item.title,
        ),
        stateBadge,
        el(
          "div",
          { class: "result-meta" },
          `${item.version_id} · ${item.owner} · ${formatDate(item.shared_at)}`,
        ),
        el(
          "div",
          { class: "result-keywords" },
          ...item.keywords.map((keyword) => badge(keyword, "badge-keyword")),
        ),
      ),
    );
  }
  return list;
}
