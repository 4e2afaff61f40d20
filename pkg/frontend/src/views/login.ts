import { ApiError } from "../api.js";
import type { Ctx, View } from "../view.js";
import { clear, errorBanner, h } from "../view.js";

export function loginView(ctx: Ctx): View {
  const banner = h("div", { class: "banner-slot" });
  const idInput = h("input", {
    id: "login-id",
    autocomplete: "username",
    placeholder: "EXP-0001",
  }) as HTMLInputElement;
  const secretInput = h("input", {
    id: "login-secret",
    type: "password",
    autocomplete: "current-password",
  }) as HTMLInputElement;

  const form = h(
    "form",
    {
      class: "panel login",
      onsubmit: (ev: Event) => {
        ev.preventDefault();
        void submit();
      },
    },
    h("h1", {}, "Sign in"),
    banner,
    h("label", { for: "login-id" }, "Account id"),
    idInput,
    h("label", { for: "login-secret" }, "Secret"),
    secretInput,
    h("div", { style: "margin-top:12px" }, h("button", { type: "submit" }, "Sign in")),
  );

  async function submit(): Promise<void> {
    clear(banner);
    try {
      await ctx.api.login(idInput.value.trim(), secretInput.value);
      ctx.navigate("#/");
    } catch (err) {
      const text =
        err instanceof ApiError && err.status === 401
          ? "Sign-in failed: check the account id and secret."
          : "Sign-in failed: the service is unreachable.";
      banner.append(errorBanner(text));
    }
  }

  return { el: form, destroy() {} };
}
