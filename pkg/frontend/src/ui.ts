/** Minimal DOM helpers; no framework. */

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | boolean | ((event: Event) => void)> = {},
  ...children: (Node | string | null | undefined)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === "function") {
      node.addEventListener(key.replace(/^on/, ""), value as EventListener);
    } else if (typeof value === "boolean") {
      if (value) node.setAttribute(key, "");
    } else {
      node.setAttribute(key, value);
    }
  }
  for (const child of children) {
    if (child === null || child === undefined) continue;
    node.append(typeof child === "string" ? document.createTextNode(child) : child);
  }
  return node;
}

export function clear(node: HTMLElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

export function badge(text: string, variant = ""): HTMLElement {
  return el("span", { class: `badge ${variant}`.trim() }, text);
}

/** A dismissable error banner carrying the ApiError message. */
export function errorBanner(message: string): HTMLElement {
  return el("div", { class: "error-banner", role: "alert" }, message);
}

/** Inline field error, attached under the labeled form control. */
export function fieldErrorNote(reason: string): HTMLElement {
  return el("div", { class: "field-error" }, reason);
}

export async function copyToClipboard(text: string, source?: HTMLInputElement): Promise<boolean> {
  try {
    if (navigator.clipboard?.writeText) {
      await navigator.clipboard.writeText(text);
      return true;
    }
  } catch {
    // fall through to selection
  }
  if (source) {
    source.focus();
    source.select();
  }
  return false;
}
