/**
 * Closed-class word lists and tagging rules for referring expressions.
 *
 * The built-in backend only needs to handle the noun-phrase grammar of
 * referring expressions (determiners, attributes, head noun, prepositional
 * and participial modifiers), so a small lexicon plus two suffix rules
 * covers it.  Everything unknown defaults to a noun, which is the safe
 * choice for object names.
 */

export const DETERMINERS = new Set([
  'the', 'a', 'an', 'this', 'that', 'these', 'those', 'his', 'her', 'its', 'their', 'my',
]);

export const PREPOSITIONS = new Set([
  'on', 'in', 'at', 'under', 'over', 'near', 'behind', 'beside', 'above', 'below',
  'with', 'without', 'of', 'by', 'to', 'from', 'inside', 'outside', 'between',
  'left_of', 'right_of', 'next_to',
]);

export const CONJUNCTIONS = new Set(['and', 'or']);

export const AUXILIARIES = new Set(['is', 'are', 'was', 'were', 'be', 'been', 'being']);

export const ADJECTIVES = new Set([
  'black', 'white', 'red', 'blue', 'green', 'yellow', 'brown', 'gray', 'grey',
  'pink', 'purple', 'orange', 'dark', 'light', 'left', 'right', 'leftmost',
  'rightmost', 'upper', 'lower', 'top', 'bottom', 'middle', 'big', 'small',
  'large', 'little', 'tall', 'short', 'long', 'young', 'old', 'striped',
  'plaid', 'furry', 'shiny', 'wooden', 'metal', 'plastic', 'empty', 'full',
]);

/** Known irregular -ing forms would go here; the suffix rule covers the rest. */
const VERB_ING = /^[a-z]+ing$/;

export type Tag = 'DT' | 'IN' | 'CC' | 'JJ' | 'VBG' | 'AUX' | 'NN' | 'NNS';

export function tagToken(word: string): Tag {
  if (DETERMINERS.has(word)) return 'DT';
  if (PREPOSITIONS.has(word)) return 'IN';
  if (CONJUNCTIONS.has(word)) return 'CC';
  if (AUXILIARIES.has(word)) return 'AUX';
  if (ADJECTIVES.has(word)) return 'JJ';
  if (VERB_ING.test(word) && word.length > 4) return 'VBG';
  if (word.endsWith('s') && word.length > 3 && !word.endsWith('ss')) return 'NNS';
  return 'NN';
}

export function isNoun(tag: Tag): boolean {
  return tag === 'NN' || tag === 'NNS';
}

/** Lowercase and split; punctuation is stripped, hyphens kept as-is. */
export function tokenize(sentence: string): string[] {
  return sentence
    .toLowerCase()
    .replace(/[.,!?;:"()]/g, ' ')
    .split(/\s+/)
    .filter((w) => w.length > 0);
}
