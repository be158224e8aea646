/** Pure SVG builders for the two dashboard charts.
 *
 * Both take API documents (or points derived 1:1 from them) and return
 * markup strings, so they are testable without a DOM.
 */

import type { HistogramDoc } from "./types.js";
import type { TradeOffPoint } from "./state.js";

export interface HistogramBin {
  label: string;
  classes: number;
}

/** Exact one-bar-per-class-size bins while the partition is small; above
 * 50 classes, power-of-two size ranges keep the chart readable. */
export function histogramBins(doc: HistogramDoc): HistogramBin[] {
  const entries = [...doc.histogram].sort((a, b) => a.size - b.size);
  if (doc.class_count <= 50) {
    return entries.map((e) => ({ label: String(e.size), classes: e.classes }));
  }
  const ranged = new Map<number, number>();
  for (const e of entries) {
    const bucket = Math.floor(Math.log2(e.size));
    ranged.set(bucket, (ranged.get(bucket) ?? 0) + e.classes);
  }
  return [...ranged.entries()]
    .sort((a, b) => a[0] - b[0])
    .map(([bucket, classes]) => {
      const low = 2 ** bucket;
      const high = 2 ** (bucket + 1) - 1;
      return { label: low === high ? String(low) : `${low}-${high}`, classes };
    });
}

const WIDTH = 420;
const HEIGHT = 180;
const PAD = 28;

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/"/g, "&quot;");
}

/** Bar chart of equivalence-class sizes: x = class size, y = classes. */
export function histogramSvg(doc: HistogramDoc): string {
  const bins = histogramBins(doc);
  if (bins.length === 0) {
    return `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img"></svg>`;
  }
  const max = Math.max(...bins.map((b) => b.classes));
  const slot = (WIDTH - 2 * PAD) / bins.length;
  const bars = bins
    .map((bin, i) => {
      const h = ((HEIGHT - 2 * PAD) * bin.classes) / max;
      const x = PAD + i * slot;
      const y = HEIGHT - PAD - h;
      return (
        `<rect class="bar" x="${x.toFixed(1)}" y="${y.toFixed(1)}" ` +
        `width="${Math.max(slot - 4, 2).toFixed(1)}" height="${h.toFixed(1)}">` +
        `<title>size ${esc(bin.label)}: ${bin.classes} classes</title></rect>` +
        `<text class="tick" x="${(x + slot / 2 - 2).toFixed(1)}" ` +
        `y="${HEIGHT - PAD + 14}" text-anchor="middle">${esc(bin.label)}</text>`
      );
    })
    .join("");
  return (
    `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" aria-label="class size histogram">` +
    `${bars}<line class="axis" x1="${PAD}" y1="${HEIGHT - PAD}" x2="${WIDTH - PAD}" ` +
    `y2="${HEIGHT - PAD}"/></svg>`
  );
}

/** Scatter of explored states: x = utility granularity, y = worst-class
 * risk (inverse minimum class size), one marker per point. */
export function tradeOffSvg(points: TradeOffPoint[]): string {
  const xFor = (g: number) => PAD + g * (WIDTH - 2 * PAD);
  const yFor = (r: number) => HEIGHT - PAD - r * (HEIGHT - 2 * PAD);
  const markers = points
    .map((p) => {
      const cls = p.kind === "preview" ? "point preview" : "point committed";
      return (
        `<circle class="${cls}" cx="${xFor(p.granularity).toFixed(1)}" ` +
        `cy="${yFor(p.inverseMin).toFixed(1)}" r="5">` +
        `<title>${esc(p.label)}: granularity ${p.granularity}, ` +
        `inverse-min ${p.inverseMin}</title></circle>`
      );
    })
    .join("");
  return (
    `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" aria-label="risk-utility trade-off">` +
    `<line class="axis" x1="${PAD}" y1="${HEIGHT - PAD}" x2="${WIDTH - PAD}" y2="${HEIGHT - PAD}"/>` +
    `<line class="axis" x1="${PAD}" y1="${PAD}" x2="${PAD}" y2="${HEIGHT - PAD}"/>` +
    `<text class="tick" x="${WIDTH / 2}" y="${HEIGHT - 6}" text-anchor="middle">utility (granularity)</text>` +
    `<text class="tick" x="12" y="${HEIGHT / 2}" transform="rotate(-90 12 ${HEIGHT / 2})" text-anchor="middle">risk (1/min class)</text>` +
    `${markers}</svg>`
  );
}
