// Shared palette: must match the server's slice SVG fills exactly so the
// viewport, the slice viewer and the exported drawings agree.
export const COLOR_FOAM_MINUS = "#1f77b4"; // inserted from -x (blue)
export const COLOR_FOAM_PLUS = "#ff7f0e"; // inserted from +x (orange)
export const COLOR_OCCUPIED = "#ffffff";
export const COLOR_DESIGN_SPACE = "#2ca02c";
