/**
 * Figure renderer CLI.
 *
 *   node dist/cli.js render --figure fig5a --in results/ise_vs_snr.csv \
 *       --out fig5a.svg
 *
 * --in accepts several CSV paths sharing one schema (e.g. the two
 * accuracy-experiment runs). Exit codes: 0 ok, 1 usage/data error.
 */

import { FIGURE_IDS, FigureId } from "./figures.js";
import { render } from "./render.js";

function usage(): string {
  return (
    "usage: render --figure {" +
    FIGURE_IDS.join(",") +
    "} --in <csv...> --out <svg>"
  );
}

export function parseArgs(argv: string[]): {
  figure: FigureId;
  inputs: string[];
  output: string;
} {
  if (argv[0] !== "render") {
    throw new Error(usage());
  }
  let figure: string | null = null;
  const inputs: string[] = [];
  let output: string | null = null;
  let i = 1;
  while (i < argv.length) {
    const arg = argv[i];
    if (arg === "--figure") {
      figure = argv[++i];
      i += 1;
    } else if (arg === "--in") {
      i += 1;
      while (i < argv.length && !argv[i].startsWith("--")) {
        inputs.push(argv[i]);
        i += 1;
      }
    } else if (arg === "--out") {
      output = argv[++i];
      i += 1;
    } else {
      throw new Error(`unknown argument: ${arg}\n${usage()}`);
    }
  }
  if (!figure || !(FIGURE_IDS as readonly string[]).includes(figure)) {
    throw new Error(`--figure must be one of ${FIGURE_IDS.join(", ")}`);
  }
  if (inputs.length === 0 || !output) {
    throw new Error(usage());
  }
  return { figure: figure as FigureId, inputs, output };
}

export function main(argv: string[]): number {
  try {
    const req = parseArgs(argv);
    render(req);
    return 0;
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    return 1;
  }
}

const isDirectRun =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (isDirectRun) {
  process.exit(main(process.argv.slice(2)));
}
