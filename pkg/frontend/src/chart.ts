// Minimal accuracy sparkline: an SVG polyline over [0, 1], one point per
// completed query.

export function renderAccuracyChart(
  svg: SVGSVGElement,
  history: number[],
  width = 320,
  height = 80,
): void {
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.innerHTML = "";
  if (history.length === 0) return;
  const step = history.length > 1 ? width / (history.length - 1) : 0;
  const points = history
    .map((acc, i) => `${(i * step).toFixed(1)},${((1 - acc) * height).toFixed(1)}`)
    .join(" ");
  const line = document.createElementNS("http://www.w3.org/2000/svg", "polyline");
  line.setAttribute("points", points);
  line.setAttribute("fill", "none");
  line.setAttribute("stroke", "#2c6fb5");
  line.setAttribute("stroke-width", "2");
  svg.appendChild(line);
}
