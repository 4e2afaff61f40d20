// Consultation: session list plus the transcript/composer for one session.
//
// The transcript is server-authoritative: a sent message appears only once
// the gateway stored it and a poll returned it, so two participants can
// never display diverging histories. Text and image references are
// first-class; AV payloads relay through sendAv() verbatim.

import { ApiError } from "../api.js";
import type { Message, SessionSummary } from "../api.js";
import { Poller } from "../poll.js";
import type { Ctx, View } from "../view.js";
import { clear, errorBanner, h } from "../view.js";

export interface ConsultView extends View {
  /** AV pass-through hook: relay one already-encoded AV payload. */
  sendAv(payload: string): Promise<Message>;
  /** One immediate poll cycle; also used by tests to avoid timer games. */
  refresh(): Promise<void>;
}

// -- session list -----------------------------------------------------

export function sessionsListView(ctx: Ctx): View {
  const body = h("tbody", {});
  const root = h(
    "div",
    {},
    h("h1", {}, "Consultations"),
    h(
      "table",
      { class: "sessions" },
      h(
        "thead",
        {},
        h(
          "tr",
          {},
          h("th", {}, "session"),
          h("th", {}, "with"),
          h("th", {}, "state"),
          h("th", {}, "messages"),
          h("th", {}, ""),
        ),
      ),
      body,
    ),
  );

  const me = ctx.api.principal?.id;
  const poller = new Poller(async () => {
    const sessions = await ctx.api.sessions();
    clear(body);
    for (const s of sessions) {
      const peer = s.initiator === me ? s.responder : s.initiator;
      body.append(
        h(
          "tr",
          { "data-session-id": s.session_id },
          h("td", {}, s.session_id),
          h("td", {}, peer),
          h("td", {}, h("span", { class: `badge ${s.state}` }, s.state)),
          h("td", {}, String(s.message_count)),
          h(
            "td",
            {},
            h("a", { href: `#/chat/${s.session_id}` }, "open"),
          ),
        ),
      );
    }
  }, ctx.pollMs);
  poller.start();

  return {
    el: root,
    destroy() {
      poller.stop();
    },
  };
}

// -- single consultation ---------------------------------------------

function renderMessage(ctx: Ctx, msg: Message, mine: boolean): HTMLElement {
  const row = h("div", {
    class: `msg ${mine ? "mine" : ""}`,
    "data-seq": String(msg.seq),
    "data-kind": msg.kind,
  });
  row.append(h("span", { class: "sender" }, `${msg.sender} #${msg.seq}`));
  if (msg.kind === "text") {
    row.append(h("span", { class: "body" }, msg.payload));
  } else if (msg.kind === "image_ref") {
    const img = h("img", { alt: `attachment ${msg.payload}` }) as HTMLImageElement;
    img.dataset.ref = msg.payload;
    row.append(img);
    void ctx.api
      .getObject(msg.payload)
      .then((blob) => {
        // jsdom has no object URLs; the data-ref stays the source of truth
        if (typeof URL.createObjectURL === "function") {
          img.src = URL.createObjectURL(blob);
        }
      })
      .catch(() => row.append(h("span", { class: "meta" }, " (attachment unavailable)")));
  } else {
    row.append(h("code", { class: "av" }, msg.payload));
  }
  return row;
}

export function consultView(ctx: Ctx, sessionId: string): ConsultView {
  const me = ctx.api.principal?.id ?? "";
  const transcript = h("div", { class: "transcript" });
  const noticeSlot = h("div", {});
  const textInput = h("input", {
    type: "text",
    class: "say",
    placeholder: "Type a message",
  }) as HTMLInputElement;
  const sendButton = h("button", { class: "send" }, "Send") as HTMLButtonElement;
  const attachInput = h("input", { type: "file", class: "attach" }) as HTMLInputElement;
  const composer = h(
    "form",
    {
      class: "composer",
      onsubmit: (ev: Event) => {
        ev.preventDefault();
        void sendText();
      },
    },
    textInput,
    attachInput,
    sendButton,
  );
  const root = h(
    "div",
    {},
    h("h1", {}, `Consultation ${sessionId}`),
    noticeSlot,
    transcript,
    composer,
  );

  let cursor = -1;
  let session: SessionSummary | null = null;

  function setComposerEnabled(on: boolean): void {
    textInput.disabled = !on;
    sendButton.disabled = !on;
    attachInput.disabled = !on;
  }
  setComposerEnabled(false);

  function applyState(): void {
    if (!session) return;
    clear(noticeSlot);
    if (session.state === "active") {
      setComposerEnabled(true);
    } else if (session.state === "terminated") {
      setComposerEnabled(false);
      noticeSlot.append(
        h("div", { class: "notice session-closed" }, "This session has ended."),
      );
    } else {
      setComposerEnabled(false);
      if (session.responder === me) {
        const accept = h(
          "button",
          {
            class: "accept",
            onclick: () => {
              void ctx.api
                .acceptSession(sessionId)
                .then(() => refresh())
                .catch(() => {});
            },
          },
          "Accept consultation",
        );
        noticeSlot.append(h("div", { class: "notice" }, "Invitation pending: ", accept));
      } else {
        noticeSlot.append(
          h("div", { class: "notice waiting" }, "Waiting for the other side to accept."),
        );
      }
    }
  }

  async function refreshNow(): Promise<void> {
    const out = await ctx.api.events(sessionId, cursor, ctx.pollMs / 1000);
    session = out.session;
    for (const msg of out.messages) {
      transcript.append(renderMessage(ctx, msg, msg.sender === me));
    }
    if (out.messages.length > 0) {
      cursor = out.next_after;
      transcript.scrollTop = transcript.scrollHeight;
    }
    applyState();
  }

  // cycles are serialized: a poll tick and a post-send refresh overlapping
  // would otherwise read the same cursor twice and append duplicates
  let chain: Promise<void> = Promise.resolve();
  function refresh(): Promise<void> {
    const cycle = chain.then(() => refreshNow());
    chain = cycle.catch(() => {});
    return cycle;
  }

  async function sendText(): Promise<void> {
    const text = textInput.value;
    if (!text) return;
    try {
      await ctx.api.postMessage(sessionId, "text", text);
      textInput.value = "";
      await refresh(); // the message renders from the server's copy only
    } catch (err) {
      handleSendError(err);
    }
  }

  async function sendAttachment(file: Blob): Promise<void> {
    try {
      const { ref } = await ctx.api.putObject(file);
      await ctx.api.postMessage(sessionId, "image_ref", ref);
      await refresh();
    } catch (err) {
      handleSendError(err);
    }
  }
  attachInput.addEventListener("change", () => {
    const file = attachInput.files?.[0];
    if (file) void sendAttachment(file);
  });

  function handleSendError(err: unknown): void {
    if (err instanceof ApiError && err.status === 409) {
      // the session closed (or is not yet active) under us; re-sync
      void refresh();
    } else {
      clear(noticeSlot);
      noticeSlot.append(errorBanner("Message not sent; the service is unreachable."));
    }
  }

  const poller = new Poller(refresh, ctx.pollMs);
  poller.start();

  return {
    el: root,
    destroy() {
      poller.stop();
    },
    async sendAv(payload: string): Promise<Message> {
      const msg = await ctx.api.postMessage(sessionId, "av_signal", payload);
      await refresh();
      return msg;
    },
    refresh,
  };
}
