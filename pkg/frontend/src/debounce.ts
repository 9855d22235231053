/** Trailing-edge debouncer: runs the latest op once the key settles. */
export class Debouncer<K> {
  private handles = new Map<K, ReturnType<typeof setTimeout>>();

  constructor(public delayMs = 300) {}

  debounce(key: K, op: () => void): void {
    const prev = this.handles.get(key);
    if (prev !== undefined) clearTimeout(prev);
    this.handles.set(
      key,
      setTimeout(() => {
        this.handles.delete(key);
        op();
      }, this.delayMs),
    );
  }

  cancel(key: K): void {
    const prev = this.handles.get(key);
    if (prev !== undefined) clearTimeout(prev);
    this.handles.delete(key);
  }
}
