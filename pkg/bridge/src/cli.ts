#!/usr/bin/env node
/**
 * bridge --in queries.txt --out queries.conllu [--backend builtin]
 *
 * Reads one query sentence per line and writes the 10-column parse file
 * the grounding engine consumes.  Blank lines are skipped with a warning.
 */

import * as fs from 'fs';
import { toConlluFile } from './conllu';
import { ParsedSentence, parseSentence } from './parser';

export interface BridgeJob {
  input: string;
  output: string;
  backend: string;
  idPrefix: string;
}

const KNOWN_BACKENDS = ['builtin'];

export function parseArgs(argv: string[]): BridgeJob {
  const job: BridgeJob = { input: '', output: '', backend: 'builtin', idPrefix: 'q' };
  for (let k = 0; k < argv.length; k++) {
    const flag = argv[k];
    const val = () => {
      const v = argv[++k];
      if (v === undefined) throw new Error(`missing value for ${flag}`);
      return v;
    };
    switch (flag) {
      case '--in': job.input = val(); break;
      case '--out': job.output = val(); break;
      case '--backend': job.backend = val(); break;
      case '--id-prefix': job.idPrefix = val(); break;
      default: throw new Error(`unknown flag ${flag}`);
    }
  }
  if (!job.input || !job.output) throw new Error('usage: bridge --in FILE --out FILE [--backend NAME]');
  return job;
}

export function runJob(job: BridgeJob, warn: (msg: string) => void = console.error): string {
  if (!KNOWN_BACKENDS.includes(job.backend)) {
    throw new Error(
      `backend "${job.backend}" is not available; this build ships the self-contained ` +
      `"builtin" backend (no dependency-parsing toolkit is installed on this system). ` +
      `Install one and register it in src/cli.ts to use it here.`
    );
  }
  const lines = fs.readFileSync(job.input, 'utf-8').split('\n');
  if (lines[lines.length - 1] === '') lines.pop(); // trailing newline
  const sentences: ParsedSentence[] = [];
  lines.forEach((line, k) => {
    if (line.trim().length === 0) {
      warn(`warning: line ${k + 1} is empty, skipped`);
      return;
    }
    sentences.push(parseSentence(line, `${job.idPrefix}${sentences.length + 1}`));
  });
  if (sentences.length === 0) {
    warn('warning: no sentences in input; writing an empty parse file');
  }
  return toConlluFile(sentences);
}

export function main(argv: string[]): number {
  try {
    const job = parseArgs(argv);
    const out = runJob(job);
    fs.writeFileSync(job.output, out);
    const blocks = out.trim().length === 0 ? 0 : out.trim().split('\n\n').length;
    console.log(`wrote ${blocks} parse blocks to ${job.output}`);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
