import { describe, expect, it } from "vitest";

import { LineSplitter, parseLines } from "../src/ndjson.js";

describe("LineSplitter", () => {
  it("splits complete lines", () => {
    const s = new LineSplitter();
    expect(s.push('{"a":1}\n{"b":2}\n')).toEqual(['{"a":1}', '{"b":2}']);
  });

  it("buffers partial lines across chunks", () => {
    const s = new LineSplitter();
    expect(s.push('{"t_s":')).toEqual([]);
    expect(s.push("1.2}\n{")).toEqual(['{"t_s":1.2}']);
    expect(s.push('"x":3}\n')).toEqual(['{"x":3}']);
  });

  it("any chunking yields the same lines", () => {
    const blob = Array.from({ length: 20 }, (_, i) => `{"n":${i}}`).join("\n") + "\n";
    const whole = new LineSplitter().push(blob);
    for (const cut of [1, 3, 7, 11]) {
      const s = new LineSplitter();
      const out: string[] = [];
      for (let pos = 0; pos < blob.length; pos += cut) {
        out.push(...s.push(blob.slice(pos, pos + cut)));
      }
      expect(out).toEqual(whole);
    }
  });

  it("flush returns the unterminated tail", () => {
    const s = new LineSplitter();
    s.push("partial");
    expect(s.flush()).toBe("partial");
    expect(s.flush()).toBeNull();
  });

  it("skips empty lines", () => {
    expect(new LineSplitter().push("\n\n{}\n")).toEqual(["{}"]);
  });
});

describe("parseLines", () => {
  it("parses json objects", () => {
    expect(parseLines<{ a: number }>(['{"a":1}'])).toEqual([{ a: 1 }]);
  });

  it("drops torn lines instead of throwing", () => {
    expect(parseLines(['{"a":1}', '{"bro', '{"b":2}'])).toEqual([
      { a: 1 },
      { b: 2 },
    ]);
  });
});
