// Per-key trailing debounce for slider drags: many position changes within
// the window collapse to exactly one committed emit (the latest value).

type Emit<V> = (key: string, value: V) => void;

export interface Debouncer<V> {
  change(key: string, value: V): void;
  flush(): void; // commit everything pending immediately
  pending(key: string): boolean;
}

export function makeDebouncer<V>(
  delayMs: number,
  emit: Emit<V>,
  schedule: (fn: () => void, ms: number) => unknown = setTimeout,
  cancel: (handle: unknown) => void = (h) => clearTimeout(h as number),
): Debouncer<V> {
  const values = new Map<string, V>();
  const timers = new Map<string, unknown>();

  function commit(key: string): void {
    timers.delete(key);
    if (!values.has(key)) return;
    const v = values.get(key) as V;
    values.delete(key);
    emit(key, v);
  }

  return {
    change(key, value) {
      values.set(key, value);
      const prev = timers.get(key);
      if (prev !== undefined) cancel(prev);
      timers.set(key, schedule(() => commit(key), delayMs));
    },
    flush() {
      for (const [key, handle] of [...timers]) {
        cancel(handle);
        commit(key);
      }
    },
    pending(key) {
      return timers.has(key);
    },
  };
}
