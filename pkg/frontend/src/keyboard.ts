// Keyboard bindings: annotators work through dozens of candidates, so
// every action has a single-key shortcut.

export interface KeyHandlers {
  accept(): void;
  reject(): void;
  skip(): void;
  finalize(): void;
  reload(): void;
}

export const KEY_MAP: Record<string, keyof KeyHandlers> = {
  a: "accept",
  r: "reject",
  s: "skip",
  f: "finalize",
  n: "reload",
};

export function bindKeys(
  target: { addEventListener: Window["addEventListener"] },
  handlers: KeyHandlers,
): void {
  target.addEventListener("keydown", (event: KeyboardEvent) => {
    if (event.metaKey || event.ctrlKey || event.altKey) {
      return;
    }
    const action = KEY_MAP[event.key.toLowerCase()];
    if (action) {
      event.preventDefault();
      handlers[action]();
    }
  });
}
