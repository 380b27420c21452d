/** Search with query, community/type filters, and sort control. */

import { clear, el, errorBanner } from "../ui.js";
import { resultList } from "./results.js";
import type { App } from "../main.js";
import type { Route } from "../router.js";

type SearchRoute = Extract<Route, { kind: "search" }>;

export async function renderSearch(
  app: App,
  container: HTMLElement,
  route: SearchRoute,
): Promise<void> {
  clear(container);
  const results = el("div", { class: "search-results", id: "search-results" });

  const queryInput = el("input", {
    type: "search",
    id: "search-query",
    value: route.q,
    placeholder: "title, keyword, or author",
  });
  const communitySelect = el("select", { id: "search-community" }, el("option", { value: "" }, "any community"));
  const typeSelect = el(
    "select",
    { id: "search-type" },
    el("option", { value: "" }, "any type"),
    ...["dataset", "software", "publication", "other"].map((t) =>
      el("option", { value: t, ...(route.type === t ? { selected: true } : {}) }, t),
    ),
  );
  const sortSelect = el(
    "select",
    { id: "search-sort" },
    ...["newest", "oldest", "best-match"].map((s) =>
      el("option", { value: s, ...(route.sort === s ? { selected: true } : {}) }, s),
    ),
  );

  const form = el(
    "form",
    {
      class: "search-form",
      onsubmit: (event) => {
        event.preventDefault();
        app.navigate({
          kind: "search",
          q: queryInput.value,
          community: (communitySelect as HTMLSelectElement).value,
          type: (typeSelect as HTMLSelectElement).value,
          sort: (sortSelect as HTMLSelectElement).value,
        });
      },
    },
    queryInput,
    communitySelect,
    typeSelect,
    sortSelect,
    el("button", { type: "submit" }, "Search"),
  );

  container.append(el("section", { class: "search" }, el("h1", {}, "Search"), form, results));

  try {
    const { communities } = await app.session.client.communities();
    for (const community of communities) {
      communitySelect.append(
        el(
          "option",
          {
            value: community.slug,
            ...(route.community === community.slug ? { selected: true } : {}),
          },
          `${community.display_name} (${community.kind})`,
        ),
      );
    }
  } catch {
    // anonymous or failed: community filter stays free-form
  }

  try {
    const page = await app.session.client.search({
      q: route.q,
      community: route.community || undefined,
      type: route.type || undefined,
      sort: route.sort,
      size: 50,
    });
    results.append(
      el("p", { class: "hint" }, `${page.total} hit(s)`),
      resultList(app, page.items),
    );
  } catch (error) {
    results.append(errorBanner(`Search failed: ${(error as Error).message}`));
  }
}
