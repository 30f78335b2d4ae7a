// Tile renderer: paints a 14x16 segment onto a canvas, one filled square
// per cell. Colors follow the fixed legend; malformed grids raise
// GridFormatError so the caller can show an error banner instead of a
// half-drawn segment.

export const ROWS = 14;
export const COLS = 16;

export const TILE_COLORS: Record<string, string> = {
  "-": "#9ad6f2", // air: sky
  X: "#8b5a2b", // ground: brown
  "#": "#9e9e9e", // platform: gray
  o: "#f2c832", // coin: yellow
  E: "#d03a2f", // enemy: red
  T: "#2c9434", // pipe top: green
  "|": "#2c9434", // pipe body: green
};

export class GridFormatError extends Error {}

// The subset of CanvasRenderingContext2D the renderer touches; tests pass
// a recording stub since jsdom has no real 2D context. The fillStyle type
// mirrors the DOM's so a real context satisfies the interface.
export interface TilePainter {
  fillStyle: string | CanvasGradient | CanvasPattern;
  fillRect(x: number, y: number, w: number, h: number): void;
}

export function validateGrid(grid: string[]): void {
  if (grid.length !== ROWS) {
    throw new GridFormatError(`expected ${ROWS} rows, got ${grid.length}`);
  }
  grid.forEach((row, r) => {
    if (row.length !== COLS) {
      throw new GridFormatError(`row ${r} has ${row.length} columns, expected ${COLS}`);
    }
    for (const ch of row) {
      if (!(ch in TILE_COLORS)) {
        throw new GridFormatError(`unknown tile symbol ${JSON.stringify(ch)} in row ${r}`);
      }
    }
  });
}

export function renderSegment(ctx: TilePainter, grid: string[], cellSize = 28): void {
  validateGrid(grid);
  for (let r = 0; r < ROWS; r++) {
    const row = grid[r]!;
    for (let c = 0; c < COLS; c++) {
      ctx.fillStyle = TILE_COLORS[row[c]!]!;
      ctx.fillRect(c * cellSize, r * cellSize, cellSize, cellSize);
    }
  }
}
