// Shared glue for driving the real console against the fake gateway.

import { GatewayApi } from "../src/api.js";
import { App } from "../src/app.js";
import type { Ctx } from "../src/view.js";
import { FakeGateway } from "./fake-gateway.js";

export const sleep = (ms: number): Promise<void> =>
  new Promise((resolve) => setTimeout(resolve, ms));

/** Poll interval used in tests; sleeps are sized off this. */
export const TEST_POLL_MS = 40;

/** Long enough for a couple of poll ticks plus their fetches. */
export const settle = (): Promise<void> => sleep(TEST_POLL_MS * 3);

export interface Harness {
  fake: FakeGateway;
  app: App;
  teardown(): void;
}

export function mount(fake?: FakeGateway): Harness {
  const gw = fake ?? new FakeGateway();
  const restore = gw.install();
  window.location.hash = "";
  document.body.innerHTML = "";
  const root = document.createElement("div");
  document.body.append(root);
  const app = new App(root, { pollMs: TEST_POLL_MS });
  app.start();
  return {
    fake: gw,
    app,
    teardown() {
      app.stop();
      restore();
    },
  };
}

/** Fill and submit the sign-in form like a user would. */
export async function signIn(id: string, secret: string): Promise<void> {
  const idInput = document.getElementById("login-id") as HTMLInputElement;
  const secretInput = document.getElementById("login-secret") as HTMLInputElement;
  idInput.value = id;
  secretInput.value = secret;
  idInput.closest("form")!.dispatchEvent(
    new Event("submit", { bubbles: true, cancelable: true }),
  );
  await settle();
}

/** Signed-in API client for driving views without the app shell. */
export async function apiFor(fake: FakeGateway, id: string): Promise<GatewayApi> {
  const api = new GatewayApi();
  await api.login(id, fake.secretFor(id));
  return api;
}

export function ctxFor(api: GatewayApi): Ctx {
  return { api, navigate: () => {}, pollMs: TEST_POLL_MS };
}

export function q<T extends Element>(selector: string): T {
  const node = document.querySelector<T>(selector);
  if (!node) throw new Error(`expected element ${selector}`);
  return node;
}

export function qa<T extends Element>(selector: string): T[] {
  return [...document.querySelectorAll<T>(selector)];
}
