/** Step-by-step upload wizard: metadata -> files -> review -> share.
 *
 * Drag-and-drop or multi-select file staging, per-file progress bars,
 * and a running total of staged bytes. Client-side validation mirrors
 * the server's rules for responsiveness; the server report is
 * authoritative and lands inline on the matching fields. */

import { STEPS, UploadWizard } from "../wizard.js";
import { formatBytes } from "../format.js";
import { clear, el, errorBanner, fieldErrorNote } from "../ui.js";
import type { App } from "../main.js";

export function renderUpload(app: App, container: HTMLElement): void {
  const wizard = new UploadWizard();
  draw(app, container, wizard);
}

function draw(app: App, container: HTMLElement, wizard: UploadWizard): void {
  clear(container);
  const section = el("section", { class: "upload-wizard", "data-step": wizard.step });
  const steps = el(
    "ol",
    { class: "wizard-steps" },
    ...STEPS.map((step) =>
      el("li", { class: step === wizard.step ? "active" : "" }, step),
    ),
  );
  section.append(el("h1", {}, "Upload a record"), steps);
  const body = el("div", { class: "wizard-body" });
  section.append(body);
  container.append(section);

  const redraw = () => draw(app, container, wizard);

  if (wizard.step === "metadata") drawMetadata(body, wizard, redraw);
  else if (wizard.step === "files") drawFiles(body, wizard, redraw);
  else if (wizard.step === "review") drawReview(body, wizard, redraw);
  else drawShare(app, body, wizard, redraw);
}

function navButtons(
  wizard: UploadWizard,
  redraw: () => void,
  nextLabel = "Continue",
): HTMLElement {
  return el(
    "div",
    { class: "wizard-nav" },
    STEPS.indexOf(wizard.step) > 0
      ? el(
          "button",
          {
            id: "wizard-back",
            type: "button",
            onclick: () => {
              wizard.back();
              redraw();
            },
          },
          "Back",
        )
      : null,
    el(
      "button",
      {
        id: "wizard-next",
        type: "submit",
      },
      nextLabel,
    ),
  );
}

function labeled(
  wizard: UploadWizard,
  field: string,
  label: string,
  control: HTMLElement,
): HTMLElement {
  const wrapper = el("div", { class: "form-field", "data-field": field }, el("label", {}, label), control);
  const reason = wizard.fieldError(field);
  if (reason) wrapper.append(fieldErrorNote(reason));
  return wrapper;
}

function drawMetadata(body: HTMLElement, wizard: UploadWizard, redraw: () => void): void {
  const md = wizard.metadata;
  const title = el("input", { type: "text", id: "md-title", value: md.title ?? "" });
  const description = el("textarea", { id: "md-description" });
  (description as HTMLTextAreaElement).value = md.description ?? "";
  const keywords = el("input", {
    type: "text",
    id: "md-keywords",
    value: (md.keywords ?? []).join(", "),
    placeholder: "comma-separated",
  });
  const authors = el("input", {
    type: "text",
    id: "md-authors",
    value: (md.authors ?? []).map((a) => a.name).join("; "),
    placeholder: "names, separated by ;",
  });
  const license = el(
    "select",
    { id: "md-license" },
    el("option", { value: "" }, "choose a license"),
    ...["CC-BY-4.0", "CC0-1.0", "GPL-3.0", "MIT", "bm-2030"].map((id) =>
      el("option", { value: id, ...(md.license === id ? { selected: true } : {}) }, id),
    ),
  );
  const resourceType = el(
    "select",
    { id: "md-type" },
    ...["dataset", "software", "publication", "other"].map((t) =>
      el("option", { value: t, ...(md.resource_type === t ? { selected: true } : {}) }, t),
    ),
  );

  const form = el(
    "form",
    {
      onsubmit: (event) => {
        event.preventDefault();
        wizard.metadata = {
          ...wizard.metadata,
          title: (title as HTMLInputElement).value,
          description: (description as HTMLTextAreaElement).value,
          keywords: (keywords as HTMLInputElement).value
            .split(",")
            .map((k) => k.trim())
            .filter(Boolean),
          authors: (authors as HTMLInputElement).value
            .split(";")
            .map((name) => name.trim())
            .filter(Boolean)
            .map((name) => ({ name, affiliations: [] })),
          license: (license as HTMLSelectElement).value,
          resource_type: (resourceType as HTMLSelectElement).value,
        };
        wizard.next();
        redraw();
      },
    },
    labeled(wizard, "title", "Title", title),
    labeled(wizard, "description", "Description", description),
    labeled(wizard, "keywords", "Keywords", keywords),
    labeled(wizard, "authors", "Authors", authors),
    labeled(wizard, "license", "License", license),
    labeled(wizard, "resource_type", "Resource type", resourceType),
    navButtons(wizard, redraw),
  );
  body.append(form);
}

function drawFiles(body: HTMLElement, wizard: UploadWizard, redraw: () => void): void {
  const rejects = el("div", {});
  const dropZone = el(
    "div",
    {
      class: "drop-zone",
      id: "drop-zone",
      ondragover: (event) => {
        event.preventDefault();
        (event.currentTarget as HTMLElement).classList.add("over");
      },
      ondragleave: (event) => {
        (event.currentTarget as HTMLElement).classList.remove("over");
      },
      ondrop: (event) => {
        event.preventDefault();
        const files = Array.from((event as DragEvent).dataTransfer?.files ?? []);
        stage(files);
      },
    },
    "Drag files here, or choose below",
  );
  const picker = el("input", {
    type: "file",
    id: "file-picker",
    multiple: true,
    onchange: (event) => {
      const input = event.currentTarget as HTMLInputElement;
      stage(Array.from(input.files ?? []));
      input.value = "";
    },
  });

  function stage(files: File[]): void {
    clear(rejects);
    const rejected = wizard.addFiles(
      files.map((f) => ({ name: f.name, size: f.size, blob: f })),
    );
    for (const r of rejected) rejects.append(errorBanner(`${r.field}: ${r.reason}`));
    redraw();
  }

  const list = el("ul", { class: "staged-files", id: "staged-files" });
  for (const file of wizard.files) {
    list.append(
      el(
        "li",
        { "data-name": file.name },
        el("span", { class: "file-name" }, file.name),
        el("span", { class: "file-size" }, ` ${formatBytes(file.size)} `),
        el(
          "button",
          {
            type: "button",
            class: "remove-file",
            onclick: () => {
              wizard.removeFile(file.name);
              redraw();
            },
          },
          "remove",
        ),
      ),
    );
  }

  const form = el(
    "form",
    {
      onsubmit: (event) => {
        event.preventDefault();
        wizard.next();
        redraw();
      },
    },
    dropZone,
    picker,
    rejects,
    list,
    el(
      "p",
      { class: "total-size", id: "total-size" },
      `Total size: ${formatBytes(wizard.totalSize())}`,
    ),
    navButtons(wizard, redraw),
  );
  body.append(form);
}

function drawReview(body: HTMLElement, wizard: UploadWizard, redraw: () => void): void {
  const md = wizard.metadata;
  const form = el(
    "form",
    {
      onsubmit: (event) => {
        event.preventDefault();
        wizard.next();
        redraw();
      },
    },
    el(
      "dl",
      { class: "review", id: "review-summary" },
      el("dt", {}, "Title"),
      el("dd", { id: "review-title" }, md.title ?? ""),
      el("dt", {}, "License"),
      el("dd", {}, md.license ?? ""),
      el("dt", {}, "Keywords"),
      el("dd", {}, (md.keywords ?? []).join(", ") || "—"),
      el("dt", {}, "Authors"),
      el("dd", {}, (md.authors ?? []).map((a) => a.name).join("; ") || "—"),
      el("dt", {}, "Files"),
      el(
        "dd",
        { id: "review-files" },
        `${wizard.files.length} file(s), ${formatBytes(wizard.totalSize())}`,
      ),
    ),
    navButtons(wizard, redraw, "Looks right"),
  );
  body.append(form);
}

function drawShare(
  app: App,
  body: HTMLElement,
  wizard: UploadWizard,
  redraw: () => void,
): void {
  const notice = el("div", {});
  const progress = el("div", { class: "upload-progress", id: "upload-progress" });
  const communitySelect = el("select", { id: "wizard-share-community" });
  app.session.client
    .communities()
    .then(({ communities }) => {
      for (const community of communities.filter((c) => c.kind === "project")) {
        communitySelect.append(el("option", { value: community.slug }, community.display_name));
      }
    })
    .catch(() => undefined);

  const choices: [string, string][] = [
    ["none", "Keep as private draft"],
    ["community", "Share with a community"],
    ["consortium", "Share with the whole consortium"],
  ];
  const radios = choices.map(([value, label]) =>
    el(
      "label",
      { class: "share-choice" },
      el("input", {
        type: "radio",
        name: "share-mode",
        value,
        ...(wizard.share.mode === value ? { checked: true } : {}),
        onchange: () => {
          wizard.share.mode = value as "none" | "community" | "consortium";
        },
      }),
      label,
    ),
  );

  function drawProgress(): void {
    clear(progress);
    for (const file of wizard.files) {
      const percent = Math.round(file.progress * 100);
      progress.append(
        el(
          "div",
          { class: "progress-row", "data-name": file.name },
          el("span", { class: "file-name" }, file.name),
          el(
            "progress",
            { max: "100", value: String(percent) },
            `${percent}%`,
          ),
          el("span", { class: "progress-percent" }, `${percent}%`),
        ),
      );
    }
    progress.append(
      el(
        "p",
        { class: "total-size" },
        `Uploaded ${formatBytes(wizard.uploadedSize())} of ${formatBytes(wizard.totalSize())}`,
      ),
    );
  }

  const form = el(
    "form",
    {
      onsubmit: async (event) => {
        event.preventDefault();
        clear(notice);
        if (wizard.share.mode === "community") {
          wizard.share.community = (communitySelect as HTMLSelectElement).value;
        }
        const submit = form.querySelector("#wizard-next") as HTMLButtonElement;
        submit.disabled = true;
        try {
          const recordId = await wizard.submit(app.session.client, () => drawProgress());
          app.navigate({ kind: "record", recordId, versionIndex: null, linkToken: null });
        } catch (error) {
          submit.disabled = false;
          notice.append(errorBanner((error as Error).message));
          if (wizard.errors.length) {
            wizard.step = "metadata"; // server-side field errors land inline
            redraw();
          }
        }
      },
    },
    el("h2", {}, "Share"),
    ...radios,
    communitySelect,
    notice,
    progress,
    navButtons(wizard, redraw, "Create record"),
  );
  drawProgress();
  body.append(form);
}
