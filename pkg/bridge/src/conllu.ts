/**
 * 10-column tab-separated output, one block per sentence, blank-line
 * separated, with sent_id/text comments.  Columns: index, surface, _,
 * POS, _, _, head, relation, _, _ — the layout the engine's parse reader
 * consumes.
 */

import { ParsedSentence } from './parser';

export function toConllu(sentence: ParsedSentence): string {
  const lines = [`# sent_id = ${sentence.sentenceId}`, `# text = ${sentence.text}`];
  for (const t of sentence.tokens) {
    // AUX is an internal convenience tag; emit the verbal surface tag
    const pos = t.pos === 'AUX' ? 'VBZ' : t.pos;
    lines.push([t.index, t.surface, '_', pos, '_', '_', t.head, t.relation, '_', '_'].join('\t'));
  }
  return lines.join('\n') + '\n';
}

export function toConlluFile(sentences: ParsedSentence[]): string {
  return sentences.map(toConllu).join('\n');
}
