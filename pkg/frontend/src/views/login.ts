import { ApiError } from "../api.js";
import { login } from "../session.js";
import { clear, el, errorBanner } from "../ui.js";
import type { App } from "../main.js";

export function renderLogin(app: App, container: HTMLElement): void {
  clear(container);
  const tokenInput = el("input", {
    type: "password",
    id: "token-input",
    class: "token-input",
    placeholder: "paste your API token",
    autocomplete: "off",
  });
  const status = el("div", { class: "login-status" });

  const form = el(
    "form",
    {
      class: "login-form",
      onsubmit: async (event) => {
        event.preventDefault();
        clear(status);
        try {
          const session = await login(tokenInput.value.trim(), app.baseUrl, app.transport);
          app.session = session;
          app.navigate({ kind: "workspace" });
        } catch (error) {
          const message =
            error instanceof ApiError && error.status === 401
              ? "Token rejected: check that it is current and your account is confirmed."
              : `Cannot sign in: ${(error as Error).message}`;
          status.append(errorBanner(message));
        }
      },
    },
    el("h1", {}, "Sign in"),
    el(
      "p",
      { class: "hint" },
      "Authentication uses an API token generated from your account settings.",
    ),
    el("label", { for: "token-input" }, "API token"),
    tokenInput,
    el("button", { type: "submit", id: "login-submit" }, "Sign in"),
    status,
  );
  container.append(el("section", { class: "login" }, form));
}
