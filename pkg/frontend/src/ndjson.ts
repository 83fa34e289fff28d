/** Incremental splitter for newline-delimited JSON streams. Chunks may cut
 * lines anywhere; complete lines come out in order. */
export class LineSplitter {
  private buf = "";

  push(chunk: string): string[] {
    this.buf += chunk;
    const parts = this.buf.split("\n");
    this.buf = parts.pop() ?? "";
    return parts.filter((line) => line.length > 0);
  }

  /** Remaining partial line, if the stream ended without a newline. */
  flush(): string | null {
    const rest = this.buf;
    this.buf = "";
    return rest.length > 0 ? rest : null;
  }
}

/** Parse each complete line as JSON, skipping lines that do not parse
 * (a torn line after a reconnect is data loss, not an error). */
export function parseLines<T>(lines: string[]): T[] {
  const out: T[] = [];
  for (const line of lines) {
    try {
      out.push(JSON.parse(line) as T);
    } catch {
      // tolerated: resynchronize on the next line
    }
  }
  return out;
}
