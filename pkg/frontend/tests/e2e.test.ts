/** Scripted browser flows against a real local archive instance:
 * token login, upload wizard through to a shared record, share-link
 * mint + copy, record page with per-version and cumulative stats, and
 * ?token= read-only access while logged out.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { startApp, type App } from "../src/main.js";

const PORT = 18300 + Math.floor(Math.random() * 1000);
const BASE = `http://127.0.0.1:${PORT}`;
const TOKEN = "e2e-bootstrap-token-0123456789abcdef";

let server: ChildProcess;
let app: App;

function deploymentConfig(dataDir: string): string {
  return [
    `display_name: "E2E Archive"`,
    `base_url: "${BASE}"`,
    `data_dir: "${dataDir}"`,
    `quota_default_bytes: 10485760`,
    `communities:`,
    `  - {slug: alpha, display_name: "Project Alpha", kind: project}`,
    `  - {slug: beta, display_name: "Project Beta", kind: project}`,
    `  - {slug: consortium, display_name: "The Consortium", kind: umbrella}`,
    `users:`,
    `  - {user_id: olivia, email: olivia@example.org, email_confirmed: true,`,
    `     communities: [alpha], token: "${TOKEN}"}`,
    `  - {user_id: ana, email: ana@example.org, email_confirmed: true, communities: [alpha]}`,
  ].join("\n");
}

async function waitFor<T>(
  probe: () => T | null | undefined | false,
  what: string,
  timeoutMs = 20_000,
): Promise<T> {
  const start = Date.now();
  for (;;) {
    const value = probe();
    if (value) return value;
    if (Date.now() - start > timeoutMs) {
      throw new Error(`timed out waiting for ${what}\n--- body ---\n${document.body.innerHTML}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 30));
  }
}

function click(selector: string): void {
  const node = document.querySelector(selector) as HTMLElement | null;
  if (!node) throw new Error(`no element ${selector}`);
  node.dispatchEvent(new MouseEvent("click", { bubbles: true, cancelable: true }));
}

function setValue(selector: string, value: string): void {
  const node = document.querySelector(selector) as HTMLInputElement | null;
  if (!node) throw new Error(`no element ${selector}`);
  node.value = value;
  node.dispatchEvent(new Event("input", { bubbles: true }));
  node.dispatchEvent(new Event("change", { bubbles: true }));
}

function submit(formSelector: string): void {
  const form = document.querySelector(formSelector) as HTMLFormElement | null;
  if (!form) throw new Error(`no form ${formSelector}`);
  form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
}

beforeAll(async () => {
  const workdir = mkdtempSync(join(tmpdir(), "archive-e2e-"));
  const configPath = join(workdir, "deployment.yaml");
  writeFileSync(configPath, deploymentConfig(join(workdir, "data")));

  server = spawn(
    "archive-server",
    ["--config", configPath, "--host", "127.0.0.1", "--port", String(PORT)],
    { stdio: "inherit" },
  );
  const deadline = Date.now() + 30_000;
  for (;;) {
    try {
      const response = await fetch(`${BASE}/api/healthz`);
      if (response.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error("archive-server did not come up");
    await new Promise((resolve) => setTimeout(resolve, 100));
  }

  document.body.innerHTML = '<div id="app"></div>';
  app = await startApp(document.getElementById("app") as HTMLElement, {
    baseUrl: BASE,
    transport: "fetch",
  });
});

afterAll(() => {
  server?.kill();
});

describe("browser flows against a live instance", () => {
  let recordId = "";
  let shareUrl = "";

  it("logs in by pasting an API token", async () => {
    await waitFor(() => document.querySelector("#token-input"), "login form");
    setValue("#token-input", TOKEN);
    submit(".login-form");
    await waitFor(() => document.querySelector(".workspace"), "workspace after login");
    expect(document.querySelector("#whoami")?.textContent).toBe("olivia");
    // The token lives in sessionStorage only, never in localStorage.
    expect(sessionStorage.getItem("archive.bearer")).toBe(TOKEN);
    expect(localStorage.length).toBe(0);
  });

  it("walks the upload wizard to a shared record", async () => {
    click("#new-upload");
    await waitFor(() => document.querySelector(".upload-wizard"), "wizard");

    // Step 1: metadata.
    setValue("#md-title", "Browser flow record");
    setValue("#md-keywords", "browser, flow");
    setValue("#md-authors", "A. Author");
    setValue("#md-license", "bm-2030");
    submit(".wizard-body form");
    await waitFor(
      () => document.querySelector('.upload-wizard[data-step="files"]'),
      "files step",
    );

    // Step 2: stage two files through the picker.
    const picker = document.querySelector("#file-picker") as HTMLInputElement;
    const fileA = new File(["csv,content\n1,2\n"], "measurements.csv");
    const fileB = new File([new Uint8Array(2048).fill(7)], "trace.bin");
    Object.defineProperty(picker, "files", { value: [fileA, fileB] });
    picker.dispatchEvent(new Event("change", { bubbles: true }));
    await waitFor(
      () => document.querySelectorAll("#staged-files li").length === 2,
      "two staged files",
    );
    expect(document.querySelector("#total-size")?.textContent).toContain("2.0 KiB");
    submit(".wizard-body form");

    // Step 3: review.
    await waitFor(() => document.querySelector("#review-summary"), "review step");
    expect(document.querySelector("#review-title")?.textContent).toBe("Browser flow record");
    expect(document.querySelector("#review-files")?.textContent).toContain("2 file(s)");
    submit(".wizard-body form");

    // Step 4: share with the consortium and create.
    await waitFor(() => document.querySelector('input[name="share-mode"]'), "share step");
    const consortium = document.querySelector(
      'input[name="share-mode"][value="consortium"]',
    ) as HTMLInputElement;
    consortium.checked = true;
    consortium.dispatchEvent(new Event("change", { bubbles: true }));
    submit(".wizard-body form");

    const section = await waitFor(
      () => document.querySelector(".record[data-record]") as HTMLElement,
      "record page after submit",
      30_000,
    );
    recordId = section.getAttribute("data-record")!;
    expect(document.querySelector("#record-title")?.textContent).toBe("Browser flow record");
    expect(document.body.textContent).toContain("consortium");
    expect(document.querySelectorAll(".file-list li").length).toBe(2);

    // The server really shares it: per-file progress finished at 100%.
    const version = await (
      await fetch(`${BASE}/api/records/${recordId}`, {
        headers: { Authorization: `Bearer ${TOKEN}` },
      })
    ).json();
    expect(version.state).toBe("shared");
    expect(version.tier).toBe("consortium");
    expect(version.files.length).toBe(2);
  });

  it("mints a share link and shows a copyable URL", async () => {
    click("#open-share-dialog");
    await waitFor(() => document.querySelector("#mint-view-link"), "share dialog");
    click("#mint-view-link");
    const urlInput = await waitFor(
      () => document.querySelector("#link-url") as HTMLInputElement,
      "minted link URL",
    );
    shareUrl = urlInput.value;
    expect(shareUrl).toContain(`/records/${recordId}?token=`);
    click("#copy-link");
    await waitFor(
      () => /copied|copy manually/.test(document.querySelector("#copy-link")!.textContent!),
      "copy control feedback",
    );
  });

  it("renders per-version and cumulative stats on the record page", async () => {
    // Another read so the view counter is visibly non-zero.
    app.navigate({ kind: "record", recordId, versionIndex: 1, linkToken: null });
    await waitFor(() => document.querySelector("#stats-table"), "stats table");
    const versionRow = document.querySelector('#stats-table tr[data-version="1"]');
    expect(versionRow).toBeTruthy();
    const cumulative = document.querySelector("#stats-cumulative .stat-views");
    const views = Number(cumulative?.textContent ?? "0");
    expect(views).toBeGreaterThanOrEqual(1);
    expect(document.querySelector(".version-list")).toBeTruthy();
  });

  it("serves a read-only record page via ?token= while logged out", async () => {
    click("#nav-logout");
    await waitFor(() => document.querySelector("#token-input"), "login view after logout");
    expect(sessionStorage.getItem("archive.bearer")).toBeNull();

    // Simulate opening the share URL in the logged-out browser.
    const url = new URL(shareUrl);
    history.pushState({}, "", url.pathname + url.search);
    window.dispatchEvent(new PopStateEvent("popstate"));

    await waitFor(() => document.querySelector("#record-title"), "record via share link");
    expect(document.querySelector("#record-title")?.textContent).toBe("Browser flow record");
    expect(document.querySelectorAll(".file-list li").length).toBe(2);
    // Read-only: no share or versioning controls for anonymous visitors.
    expect(document.querySelector("#open-share-dialog")).toBeNull();
    expect(document.querySelector("#new-version")).toBeNull();
  });
});
