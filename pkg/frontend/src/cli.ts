#!/usr/bin/env node
/**
 * plots <convergence|cdf> --in CSV [--in CSV ...] --out FIG.(png|svg)
 *                         [--bound uatf|coherent] [--width W] [--height H]
 *
 * Reads cfmimo experiment CSVs and writes the figure; .png outputs are
 * rasterized from the SVG rendering, .svg outputs keep the vector form.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { parseArgs } from "node:util";

import { buildCdfFigure, buildConvergenceFigure, FigureData } from "./figures";
import { renderFigure } from "./svg";

export interface FigureSpec {
  kind: "convergence" | "cdf";
  inputs: string[];
  output: string;
  bound?: string;
  width?: number;
  height?: number;
}

export function buildFigure(spec: FigureSpec, texts: string[]): FigureData {
  if (spec.kind === "convergence") {
    if (spec.bound) throw new Error("--bound only applies to cdf figures");
    return buildConvergenceFigure(texts);
  }
  return buildCdfFigure(texts, spec.bound);
}

export function render(spec: FigureSpec): FigureData {
  const texts = spec.inputs.map((path) => readFileSync(path, "utf8"));
  const fig = buildFigure(spec, texts);
  const svg = renderFigure(fig, { width: spec.width, height: spec.height });
  if (spec.output.endsWith(".svg")) {
    writeFileSync(spec.output, svg);
  } else if (spec.output.endsWith(".png")) {
    // lazy import so the library part has no native dependency at load time
    const { Resvg } = require("@resvg/resvg-js");
    const png = new Resvg(svg, { font: { loadSystemFonts: true } }).render().asPng();
    writeFileSync(spec.output, png);
  } else {
    throw new Error(`unsupported output format for '${spec.output}' (use .png or .svg)`);
  }
  return fig;
}

export function main(argv: string[]): number {
  let spec: FigureSpec;
  try {
    const { values, positionals } = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        in: { type: "string", multiple: true },
        out: { type: "string" },
        bound: { type: "string" },
        width: { type: "string" },
        height: { type: "string" },
      },
    });
    if (positionals.length !== 1 || !["convergence", "cdf"].includes(positionals[0])) {
      throw new Error("usage: plots <convergence|cdf> --in CSV [--in CSV ...] --out FIG.png");
    }
    if (!values.in || values.in.length === 0) throw new Error("at least one --in CSV is required");
    if (!values.out) throw new Error("--out is required");
    if (values.bound && !["uatf", "coherent"].includes(values.bound)) {
      throw new Error(`unknown bound '${values.bound}' (use uatf or coherent)`);
    }
    spec = {
      kind: positionals[0] as FigureSpec["kind"],
      inputs: values.in,
      output: values.out,
      bound: values.bound,
      width: values.width ? Number(values.width) : undefined,
      height: values.height ? Number(values.height) : undefined,
    };
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  try {
    const fig = render(spec);
    const n = fig.series.reduce((acc, s) => acc + s.points.length, 0);
    console.log(`${spec.output}: ${fig.series.length} series, ${n} plotted points`);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
