/**
 * Deterministic dependency parsing for referring expressions.
 *
 * The grammar handled is the noun-phrase shape these queries take:
 *
 *   [det] [adj]* HEAD-NOUN ( PP | participle-VP | "and" VP )*
 *
 * The first noun heads the sentence; pre-nominal determiners and
 * adjectives attach to the next noun; prepositions open a phrase whose
 * object noun attaches back to the head noun (or to the active verb);
 * a prepositional phrase whose content is a bare adjective ("in black")
 * attaches the adjective itself; participles attach to the head noun and
 * take objects and obliques; "and" chains participles together.
 */

import { Tag, isNoun, tagToken, tokenize } from './lexicon';

export interface Token {
  index: number;     // 1-based
  surface: string;
  pos: string;
  head: number;      // 0 = root
  relation: string;
}

export interface ParsedSentence {
  sentenceId: string;
  text: string;
  tokens: Token[];
}

export function parseSentence(sentence: string, sentenceId: string): ParsedSentence {
  const words = tokenize(sentence);
  if (words.length === 0) {
    throw new Error(`${sentenceId}: empty sentence`);
  }
  const tags: Tag[] = words.map(tagToken);
  const tokens: Token[] = words.map((w, k) => ({
    index: k + 1,
    surface: w,
    pos: tags[k],
    head: 0,
    relation: 'dep',
  }));

  const rootIdx = tags.findIndex(isNoun);
  if (rootIdx < 0) {
    return noNounParse(tokens, sentenceId, sentence);
  }
  const root = tokens[rootIdx];
  root.relation = 'root';

  let currentVerb: Token | null = null;
  let firstVerb: Token | null = null;
  let pendingCase: Token[] = [];
  let pendingMods: Token[] = [];
  let pendingCC: Token | null = null;
  let pendingAux: Token[] = [];

  const nextContentIsNoun = (k: number): boolean => {
    for (let m = k + 1; m < tokens.length; m++) {
      if (tags[m] === 'DT' || tags[m] === 'JJ') continue;
      return isNoun(tags[m]);
    }
    return false;
  };

  const attachPhrase = (headToken: Token) => {
    for (const mod of pendingMods) {
      mod.head = headToken.index;
      mod.relation = mod.pos === 'DT' ? 'det' : 'amod';
    }
    pendingMods = [];
    for (const c of pendingCase) {
      c.head = headToken.index;
      c.relation = 'case';
    }
    const hadCase = pendingCase.length > 0;
    pendingCase = [];
    return hadCase;
  };

  for (let k = 0; k < tokens.length; k++) {
    if (k === rootIdx) {
      attachPhrase(root);
      root.head = 0;
      root.relation = 'root';
      continue;
    }
    const tok = tokens[k];
    switch (tags[k]) {
      case 'DT':
        pendingMods.push(tok);
        break;
      case 'JJ': {
        if (pendingCase.length > 0 && !nextContentIsNoun(k)) {
          // "in black": the adjective heads the prepositional phrase
          attachPhrase(tok);
          tok.head = currentVerb ? currentVerb.index : root.index;
          tok.relation = currentVerb ? 'obl' : 'nmod';
        } else if (nextContentIsNoun(k)) {
          pendingMods.push(tok);
        } else {
          tok.head = root.index;
          tok.relation = 'amod';
        }
        break;
      }
      case 'IN':
        pendingCase.push(tok);
        break;
      case 'CC':
        pendingCC = tok;
        break;
      case 'AUX':
        pendingAux.push(tok);
        break;
      case 'VBG': {
        if (pendingCC && firstVerb) {
          tok.head = firstVerb.index;
          tok.relation = 'conj';
          pendingCC.head = tok.index;
          pendingCC.relation = 'cc';
          pendingCC = null;
        } else {
          tok.head = root.index;
          tok.relation = 'acl';
        }
        for (const aux of pendingAux) {
          aux.head = tok.index;
          aux.relation = 'aux';
        }
        pendingAux = [];
        currentVerb = tok;
        firstVerb = firstVerb ?? tok;
        break;
      }
      default: {
        // a non-root noun: prepositional object or verb object
        const hadCase = attachPhrase(tok);
        if (hadCase) {
          tok.head = currentVerb ? currentVerb.index : root.index;
          tok.relation = currentVerb ? 'obl' : 'nmod';
        } else if (currentVerb) {
          tok.head = currentVerb.index;
          tok.relation = 'obj';
        } else {
          tok.head = root.index;
          tok.relation = 'nmod';
        }
        break;
      }
    }
  }
  // leftovers: modifiers with no following noun hang off the root
  for (const mod of pendingMods) {
    mod.head = root.index;
    mod.relation = mod.pos === 'DT' ? 'det' : 'amod';
  }
  for (const c of pendingCase) {
    c.head = root.index;
    c.relation = 'case';
  }
  for (const aux of pendingAux) {
    aux.head = root.index;
    aux.relation = 'aux';
  }
  if (pendingCC) {
    pendingCC.head = root.index;
    pendingCC.relation = 'cc';
  }
  return { sentenceId, text: sentence.trim().toLowerCase(), tokens };
}

/** Fragments with no noun ("left"): first content word is the root. */
function noNounParse(tokens: Token[], sentenceId: string, text: string): ParsedSentence {
  const contentIdx = tokens.findIndex(
    (t) => t.pos !== 'DT' && t.pos !== 'IN' && t.pos !== 'CC' && t.pos !== 'AUX'
  );
  const rootIdx = contentIdx >= 0 ? contentIdx : 0;
  tokens[rootIdx].head = 0;
  tokens[rootIdx].relation = 'root';
  tokens.forEach((t, k) => {
    if (k === rootIdx) return;
    t.head = tokens[rootIdx].index;
    t.relation = t.pos === 'DT' ? 'det' : t.pos === 'IN' ? 'case' : 'advmod';
  });
  return { sentenceId, text: text.trim().toLowerCase(), tokens };
}
