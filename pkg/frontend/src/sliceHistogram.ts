import { COLOR_FOAM_MINUS, COLOR_FOAM_PLUS, COLOR_OCCUPIED } from "./colors";

export interface CellCounts {
  occupied: number;
  foam_plus: number;
  foam_minus: number;
}

const RECT_FILL = /<rect\b[^>]*\bfill="([^"]+)"/g;

/** Per-color cell counts of a server-rendered slice SVG. */
export function countSvgCells(svg: string): CellCounts {
  const counts: CellCounts = { occupied: 0, foam_plus: 0, foam_minus: 0 };
  for (const match of svg.matchAll(RECT_FILL)) {
    const fill = match[1].toLowerCase();
    if (fill === COLOR_FOAM_MINUS) counts.foam_minus += 1;
    else if (fill === COLOR_FOAM_PLUS) counts.foam_plus += 1;
    else if (fill === COLOR_OCCUPIED) counts.occupied += 1;
  }
  return counts;
}
