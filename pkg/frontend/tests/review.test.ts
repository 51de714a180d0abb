import { afterEach, beforeEach, describe, expect, it } from "vitest";

import { ApiError, ConflictError, ScreeningApi } from "../src/api.js";
import { ReviewController, ViewState } from "../src/controller.js";
import { KEY_MAP } from "../src/keyboard.js";
import { renderExample, renderState } from "../src/render.js";
import { makeCandidates, StubScreeningServer } from "./stub-server.js";

const RELATION = "nationality";
const GENERAL = "{obj} is the nationality of {subj}";

let server: StubScreeningServer;
let api: ScreeningApi;

beforeEach(async () => {
  server = new StubScreeningServer(RELATION, makeCandidates(), GENERAL);
  const port = await server.start();
  api = new ScreeningApi(`http://127.0.0.1:${port}`);
});

afterEach(async () => {
  await server.stop();
});

function makeController(states: ViewState[]): ReviewController {
  return new ReviewController(api, RELATION, (s) => states.push(s));
}

describe("decision round-trip", () => {
  it("journals exactly what was displayed", async () => {
    const states: ViewState[] = [];
    const controller = makeController(states);
    await controller.refresh();
    const shown = controller.current();
    expect(shown.kind).toBe("candidate");
    const displayedPattern =
      shown.kind === "candidate" ? shown.candidate.pattern : undefined;
    expect(displayedPattern).toBe("{subj} , president of {obj}");

    await controller.decide("accept");
    expect(server.journal).toEqual([
      { relation: RELATION, pattern: displayedPattern, decision: "accept" },
    ]);
  });

  it("advances to the next candidate without a reload", async () => {
    const controller = makeController([]);
    await controller.refresh();
    await controller.decide("accept");
    const state = controller.current();
    expect(state.kind).toBe("candidate");
    if (state.kind === "candidate") {
      expect(state.candidate.pattern).toBe("{obj} , Prime Minister {subj}");
    }
  });

  it("skip defers without recording a final decision", async () => {
    const controller = makeController([]);
    await controller.refresh();
    await controller.decide("skip");
    const state = controller.current();
    expect(state.kind === "candidate" && state.candidate.pattern).toBe(
      "{obj} , Prime Minister {subj}",
    );
    expect(server.journal[0]?.decision).toBe("skip");
  });

  it("only decision and finalize routes receive POSTs", async () => {
    const controller = makeController([]);
    await controller.refresh();
    await controller.decide("accept");
    await controller.decide("reject");
    await controller.decide("reject");
    await controller.finalize();
    const unexpected = server.postsSeen.filter(
      (url) => !url.endsWith("/decision") && !url.endsWith("/finalize"),
    );
    expect(unexpected).toEqual([]);
  });
});

describe("refresh safety", () => {
  it("a fresh session re-displays the same pending candidate", async () => {
    const first = makeController([]);
    await first.refresh();
    const before = first.current();

    // Simulated browser refresh: brand-new controller, same server.
    const second = makeController([]);
    await second.refresh();
    const after = second.current();

    expect(before.kind).toBe("candidate");
    expect(after.kind).toBe("candidate");
    if (before.kind === "candidate" && after.kind === "candidate") {
      expect(after.candidate.pattern).toBe(before.candidate.pattern);
    }
  });

  it("a decided candidate stays decided across sessions", async () => {
    const first = makeController([]);
    await first.refresh();
    await first.decide("reject");

    const second = makeController([]);
    await second.refresh();
    const state = second.current();
    if (state.kind === "candidate") {
      expect(state.candidate.pattern).toBe("{obj} , Prime Minister {subj}");
    } else {
      throw new Error(`expected candidate, got ${state.kind}`);
    }
  });
});

describe("error handling", () => {
  it("conflicts surface to the user", async () => {
    const controller = makeController([]);
    await controller.refresh();
    const state = controller.current();
    const pattern = state.kind === "candidate" ? state.candidate.pattern! : "";
    await api.decide(RELATION, pattern, "accept");

    await controller.decide("reject"); // second decision for the same pattern
    const after = controller.current();
    expect(after.kind).toBe("error");
    if (after.kind === "error") {
      expect(after.conflict).toBe(true);
    }
  });

  it("unreachable server becomes a visible error state, no retries", async () => {
    const dead = new ScreeningApi("http://127.0.0.1:9"); // nothing listens here
    const states: ViewState[] = [];
    const controller = new ReviewController(dead, RELATION, (s) => states.push(s));
    await controller.refresh();
    expect(states.map((s) => s.kind)).toEqual(["loading", "error"]);
  });

  it("api maps statuses to typed errors", async () => {
    await expect(api.next("missing-relation")).rejects.toBeInstanceOf(ApiError);
    await api.decide(RELATION, "{subj} , president of {obj}", "accept");
    await expect(
      api.decide(RELATION, "{subj} , president of {obj}", "accept"),
    ).rejects.toBeInstanceOf(ConflictError);
  });
});

describe("finalize", () => {
  it("shows general plus the accepted patterns", async () => {
    const controller = makeController([]);
    await controller.refresh();
    await controller.decide("accept");
    await controller.decide("accept");
    await controller.decide("reject");
    expect(controller.current().kind).toBe("done");

    await controller.finalize();
    const state = controller.current();
    expect(state.kind).toBe("finalized");
    if (state.kind === "finalized") {
      expect(state.templates.general).toBe(GENERAL);
      expect(state.templates.mined).toHaveLength(2);
    }
  });
});

describe("rendering", () => {
  it("highlights subject and object spans", () => {
    const html = renderExample({
      sentence_id: "s1",
      tokens: ["Smith", ",", "president", "of", "France", "."],
      subj_span: [0, 1],
      obj_span: [4, 5],
    });
    expect(html).toContain('<mark class="subj">Smith</mark>');
    expect(html).toContain('<mark class="obj">France</mark>');
  });

  it("escapes html in patterns and templates", () => {
    const html = renderState({
      kind: "error",
      relation: "r",
      message: "<script>alert(1)</script>",
      conflict: false,
    });
    expect(html).not.toContain("<script>");
  });

  it("renders the displayed pattern text verbatim", async () => {
    const controller = makeController([]);
    await controller.refresh();
    const state = controller.current();
    if (state.kind !== "candidate") throw new Error("expected candidate");
    const html = renderState(state);
    expect(html).toContain("{subj} , president of {obj}");
    expect(html).toContain("group frequency 192");
  });
});

describe("keyboard map", () => {
  it("covers accept, reject, skip, finalize, reload", () => {
    expect(KEY_MAP).toEqual({
      a: "accept",
      r: "reject",
      s: "skip",
      f: "finalize",
      n: "reload",
    });
  });
});
