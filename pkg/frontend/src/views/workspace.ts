/** Personal workspace: the caller's own records, drafts included
 * (the API's owner=me listing). */

import { clear, el, errorBanner } from "../ui.js";
import { resultList } from "./results.js";
import type { App } from "../main.js";

export async function renderWorkspace(app: App, container: HTMLElement): Promise<void> {
  clear(container);
  const section = el("section", { class: "workspace" });
  section.append(
    el("h1", {}, "My workspace"),
    el(
      "button",
      {
        id: "new-upload",
        onclick: () => app.navigate({ kind: "upload" }),
      },
      "Upload a record",
    ),
  );
  container.append(section);
  try {
    const page = await app.session.client.search({ owner: "me", size: 100, sort: "newest" });
    section.append(
      el("p", { class: "hint" }, `${page.total} record version(s), drafts included`),
      resultList(app, page.items),
    );
  } catch (error) {
    section.append(errorBanner(`Cannot load workspace: ${(error as Error).message}`));
  }
}
