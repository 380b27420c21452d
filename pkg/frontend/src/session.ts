/** Session state: the Bearer token lives in sessionStorage only —
 * never in persistent local storage, never in URLs. */

import { ApiClient } from "./api.js";
import type { CurrentUser } from "./types.js";

const TOKEN_KEY = "archive.bearer";

export interface Session {
  client: ApiClient;
  user: CurrentUser | null;
}

export function storedToken(): string | null {
  return sessionStorage.getItem(TOKEN_KEY);
}

export function storeToken(token: string): void {
  sessionStorage.setItem(TOKEN_KEY, token);
}

export function clearToken(): void {
  sessionStorage.removeItem(TOKEN_KEY);
}

export async function openSession(
  baseUrl = "",
  transport?: "xhr" | "fetch",
): Promise<Session> {
  const token = storedToken();
  const client = new ApiClient({ baseUrl, bearerToken: token, transport });
  if (!token) return { client, user: null };
  try {
    const user = await client.me();
    return { client, user };
  } catch {
    clearToken();
    return { client: new ApiClient({ baseUrl, transport }), user: null };
  }
}

export async function login(
  token: string,
  baseUrl = "",
  transport?: "xhr" | "fetch",
): Promise<Session> {
  const client = new ApiClient({ baseUrl, bearerToken: token, transport });
  const user = await client.me(); // throws ApiError on a bad token
  storeToken(token);
  return { client, user };
}

export function logout(): void {
  clearToken();
}
