/** Filter-string grammar shared with the server.
 *
 * expr   := clause ("; " clause)*        -- may be empty
 * clause := axis " " levels | axis " [" lo "," hi "]"
 * levels := int ("," int)*               -- categorical, parameters only
 *
 * Canonical form orders clauses by axis declaration order (the seven
 * parameters, then dshock/dedge/drho) and sorts levels ascending.
 */

export const DELTA_AXES = ["dshock", "dedge", "drho"] as const;
export type DeltaAxis = (typeof DELTA_AXES)[number];

export interface CategoricalClause {
  kind: "categorical";
  axis: string;
  levels: number[]; // sorted ascending, nonempty
}

export interface RangeClause {
  kind: "range";
  axis: string;
  lo: number;
  hi: number;
}

export type Clause = CategoricalClause | RangeClause;

export class FilterSyntaxError extends Error {
  constructor(message: string, readonly position: number) {
    super(message);
    this.name = "FilterSyntaxError";
  }
}

export function filterAxes(paramNames: string[]): string[] {
  return [...paramNames, ...DELTA_AXES];
}

function canonicalize(clauses: Clause[], axes: string[]): Clause[] {
  return [...clauses].sort((a, b) => axes.indexOf(a.axis) - axes.indexOf(b.axis));
}

export function serializeFilter(clauses: Clause[], paramNames: string[]): string {
  const parts = canonicalize(clauses, filterAxes(paramNames)).map((c) =>
    c.kind === "categorical"
      ? `${c.axis} ${[...c.levels].sort((a, b) => a - b).join(",")}`
      : `${c.axis} [${formatNumber(c.lo)},${formatNumber(c.hi)}]`,
  );
  return parts.join("; ");
}

/** Shortest decimal form that still parses back to the same float. */
export function formatNumber(v: number): string {
  const s = String(v);
  // keep integral floats distinguishable from ints, matching the server
  return Number.isInteger(v) && !s.includes("e") && !s.includes(".")
    ? `${s}.0`
    : s;
}

function parseClause(text: string, offset: number, axes: string[]): Clause {
  const stripped = text.trim();
  const pad = offset + (text.length - text.trimStart().length);
  if (!stripped) throw new FilterSyntaxError("empty clause", offset);
  const space = stripped.search(/\s/);
  if (space < 0) {
    throw new FilterSyntaxError(`clause '${stripped}' has no value part`, pad);
  }
  const axis = stripped.slice(0, space);
  const rest = stripped.slice(space).trim();
  if (!axes.includes(axis)) {
    throw new FilterSyntaxError(`unknown axis '${axis}'`, pad);
  }
  if (rest.startsWith("[")) {
    if (!rest.endsWith("]")) {
      throw new FilterSyntaxError(`unterminated range in '${stripped}'`, pad);
    }
    const pieces = rest.slice(1, -1).split(",");
    if (pieces.length !== 2) {
      throw new FilterSyntaxError(`range needs exactly two bounds in '${stripped}'`, pad);
    }
    const lo = Number(pieces[0]);
    const hi = Number(pieces[1]);
    if (!pieces[0].trim() || !pieces[1].trim() || Number.isNaN(lo) || Number.isNaN(hi)) {
      throw new FilterSyntaxError(`non-numeric range bound in '${stripped}'`, pad);
    }
    if (lo > hi) throw new FilterSyntaxError(`range lo > hi in '${stripped}'`, pad);
    return { kind: "range", axis, lo, hi };
  }
  if ((DELTA_AXES as readonly string[]).includes(axis)) {
    throw new FilterSyntaxError(`axis '${axis}' is continuous; use a [lo,hi] range`, pad);
  }
  const levels = new Set<number>();
  for (const tok of rest.split(",")) {
    const t = tok.trim();
    if (!t || !/^\d+$/.test(t)) {
      throw new FilterSyntaxError(`bad level '${t}' in '${stripped}'`, pad);
    }
    levels.add(Number(t));
  }
  return { kind: "categorical", axis, levels: [...levels].sort((a, b) => a - b) };
}

export function parseFilter(s: string, paramNames: string[]): Clause[] {
  if (!s.trim()) return [];
  const axes = filterAxes(paramNames);
  const clauses: Clause[] = [];
  const seen = new Set<string>();
  let offset = 0;
  for (const chunk of s.split(";")) {
    const clause = parseClause(chunk, offset, axes);
    if (seen.has(clause.axis)) {
      throw new FilterSyntaxError(`axis '${clause.axis}' appears twice`, offset);
    }
    seen.add(clause.axis);
    clauses.push(clause);
    offset += chunk.length + 1;
  }
  return canonicalize(clauses, axes);
}

/** Rows for which every clause holds. */
export function applyFilter<T extends Record<string, unknown>>(
  rows: T[],
  clauses: Clause[],
): T[] {
  return rows.filter((row) =>
    clauses.every((c) => {
      const value = row[c.axis];
      if (c.kind === "categorical") {
        return typeof value === "number" && c.levels.includes(value);
      }
      return typeof value === "number" && c.lo <= value && value <= c.hi;
    }),
  );
}
