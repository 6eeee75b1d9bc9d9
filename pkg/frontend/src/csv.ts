/** Minimal RFC-4180 reader for the engine's report files. */

export function parseCsv(text: string): string[][] {
  const rows: string[][] = [];
  let row: string[] = [];
  let field = "";
  let quoted = false;
  let i = 0;
  const pushField = () => {
    row.push(field);
    field = "";
  };
  const pushRow = () => {
    pushField();
    rows.push(row);
    row = [];
  };
  while (i < text.length) {
    const ch = text[i];
    if (quoted) {
      if (ch === '"') {
        if (text[i + 1] === '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
        i += 1;
        continue;
      }
      field += ch;
      i += 1;
      continue;
    }
    if (ch === '"' && field === "") {
      quoted = true;
      i += 1;
    } else if (ch === ",") {
      pushField();
      i += 1;
    } else if (ch === "\r" && text[i + 1] === "\n") {
      pushRow();
      i += 2;
    } else if (ch === "\n") {
      pushRow();
      i += 1;
    } else {
      field += ch;
      i += 1;
    }
  }
  if (field !== "" || row.length > 0) {
    pushRow();
  }
  return rows;
}

export interface ReportCell {
  candidate: string;
  metric: string;
  /** Score exactly as printed by the engine (6 decimals). */
  scoreText: string;
  score: number;
  threshold: number;
  pass: boolean;
}

const REPORT_HEADER = ["candidate", "metric", "score", "threshold", "pass"];

export function parseReport(text: string): ReportCell[] {
  const rows = parseCsv(text);
  if (rows.length === 0 || rows[0].join(",") !== REPORT_HEADER.join(",")) {
    throw new Error(`unexpected report header: ${JSON.stringify(rows[0] ?? [])}`);
  }
  return rows.slice(1).map((row) => {
    if (row.length !== 5) {
      throw new Error(`malformed report row: ${JSON.stringify(row)}`);
    }
    const [candidate, metric, scoreText, thresholdText, passText] = row;
    return {
      candidate,
      metric,
      scoreText,
      score: Number(scoreText),
      threshold: Number(thresholdText),
      pass: passText === "true",
    };
  });
}
