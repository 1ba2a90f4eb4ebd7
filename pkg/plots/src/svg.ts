/** Minimal deterministic SVG assembly: no DOM, plain strings. */

export type Attrs = Record<string, string | number>;

export function el(tag: string, attrs: Attrs, children: string = ""): string {
  const parts = Object.entries(attrs)
    .map(([key, value]) => `${key}="${value}"`)
    .join(" ");
  return children === "" && tag !== "text"
    ? `<${tag} ${parts}/>`
    : `<${tag} ${parts}>${children}</${tag}>`;
}

export function svgDoc(width: number, height: number, body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}">\n<rect width="${width}" height="${height}" fill="white"/>\n` +
    body +
    "\n</svg>\n"
  );
}

function hex(channel: number): string {
  const v = Math.max(0, Math.min(255, Math.round(channel)));
  return v.toString(16).padStart(2, "0");
}

function lerp(a: number, b: number, t: number): number {
  return a + (b - a) * t;
}

type Stop = [number, [number, number, number]];

function ramp(stops: Stop[], t: number): string {
  const x = Math.max(0, Math.min(1, t));
  for (let i = 1; i < stops.length; i++) {
    if (x <= stops[i][0]) {
      const [t0, c0] = stops[i - 1];
      const [t1, c1] = stops[i];
      const local = t1 === t0 ? 0 : (x - t0) / (t1 - t0);
      return (
        "#" + hex(lerp(c0[0], c1[0], local)) + hex(lerp(c0[1], c1[1], local)) + hex(lerp(c0[2], c1[2], local))
      );
    }
  }
  const last = stops[stops.length - 1][1];
  return "#" + hex(last[0]) + hex(last[1]) + hex(last[2]);
}

const SEQUENTIAL: Stop[] = [
  [0.0, [68, 1, 84]],
  [0.25, [59, 82, 139]],
  [0.5, [33, 145, 140]],
  [0.75, [94, 201, 98]],
  [1.0, [253, 231, 37]],
];

const DIVERGING: Stop[] = [
  [0.0, [5, 48, 97]],
  [0.5, [247, 247, 247]],
  [1.0, [103, 0, 31]],
];

/** Sequential map for values in [0, 1]. */
export function sequential(t: number): string {
  return ramp(SEQUENTIAL, t);
}

/** Diverging map for values in [-max, max], white at zero. */
export function diverging(value: number, max: number): string {
  const t = max === 0 ? 0.5 : 0.5 + value / (2 * max);
  return ramp(DIVERGING, t);
}

export const SERIES_COLORS: Record<string, string> = {
  l: "#1f77b4",
  m: "#d62728",
  h: "#2ca02c",
};

export function colorBar(x: number, y: number, width: number, height: number, steps = 64): string {
  const parts: string[] = [];
  for (let i = 0; i < steps; i++) {
    parts.push(
      el("rect", {
        x: x + (i * width) / steps,
        y,
        width: width / steps + 0.5,
        height,
        fill: sequential(i / (steps - 1)),
      }),
    );
  }
  return parts.join("");
}
