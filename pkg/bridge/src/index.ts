export { parseSentence, ParsedSentence, Token } from './parser';
export { toConllu, toConlluFile } from './conllu';
export { tagToken, tokenize } from './lexicon';
export { BridgeJob, parseArgs, runJob } from './cli';
