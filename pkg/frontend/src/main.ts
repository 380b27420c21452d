/** Application shell: session, routing, navigation chrome. */

import { openSession, logout, type Session } from "./session.js";
import { parseRoute, routePath, type Route } from "./router.js";
import { clear, el } from "./ui.js";
import { renderLogin } from "./views/login.js";
import { renderWorkspace } from "./views/workspace.js";
import { renderSearch } from "./views/search.js";
import { renderRecord } from "./views/record.js";
import { renderUpload } from "./views/upload.js";

export interface App {
  baseUrl: string;
  transport?: "xhr" | "fetch";
  session: Session;
  root: HTMLElement;
  navigate(route: Route): void;
  refresh(): void;
}

export async function startApp(
  root: HTMLElement,
  options: { baseUrl?: string; transport?: "xhr" | "fetch" } = {},
): Promise<App> {
  const baseUrl = options.baseUrl ?? "";
  const session = await openSession(baseUrl, options.transport);

  const app: App = {
    baseUrl,
    transport: options.transport,
    session,
    root,
    navigate(route: Route) {
      history.pushState({}, "", routePath(route));
      render(route);
    },
    refresh() {
      render(parseRoute(location.pathname, location.search));
    },
  };

  const nav = el("nav", { class: "topbar" });
  const main = el("main", { id: "view" });
  clear(root);
  root.append(nav, main);

  function drawNav(): void {
    clear(nav);
    nav.append(
      el(
        "a",
        {
          class: "brand",
          href: "/",
          onclick: (event) => {
            event.preventDefault();
            app.navigate({ kind: "workspace" });
          },
        },
        document.title || "Archive",
      ),
      el(
        "a",
        {
          href: "/search",
          id: "nav-search",
          onclick: (event) => {
            event.preventDefault();
            app.navigate({ kind: "search", q: "", community: "", type: "", sort: "newest" });
          },
        },
        "Search",
      ),
      el(
        "a",
        {
          href: "/upload",
          id: "nav-upload",
          onclick: (event) => {
            event.preventDefault();
            app.navigate({ kind: "upload" });
          },
        },
        "Upload",
      ),
    );
    if (app.session.user) {
      nav.append(
        el("span", { class: "whoami", id: "whoami" }, app.session.user.user_id),
        el(
          "button",
          {
            id: "nav-logout",
            onclick: async () => {
              logout();
              app.session = await openSession(baseUrl, options.transport);
              app.navigate({ kind: "login" });
            },
          },
          "Sign out",
        ),
      );
    } else {
      nav.append(
        el(
          "a",
          {
            href: "/login",
            id: "nav-login",
            onclick: (event) => {
              event.preventDefault();
              app.navigate({ kind: "login" });
            },
          },
          "Sign in",
        ),
      );
    }
  }

  function render(route: Route): void {
    drawNav();
    clear(main);
    // Anonymous visitors reach record pages via share links; everything
    // else needs a session.
    if (!app.session.user && route.kind !== "record" && route.kind !== "login") {
      renderLogin(app, main);
      return;
    }
    switch (route.kind) {
      case "login":
        renderLogin(app, main);
        break;
      case "workspace":
        void renderWorkspace(app, main);
        break;
      case "search":
        void renderSearch(app, main, route);
        break;
      case "upload":
        renderUpload(app, main);
        break;
      case "record":
        void renderRecord(app, main, route.recordId, route.versionIndex, route.linkToken);
        break;
    }
  }

  window.addEventListener("popstate", () => render(parseRoute(location.pathname, location.search)));
  render(parseRoute(location.pathname, location.search));
  return app;
}

declare global {
  interface Window {
    __ARCHIVE_APP__?: Promise<App>;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  window.__ARCHIVE_APP__ = startApp(document.getElementById("app") as HTMLElement);
}
