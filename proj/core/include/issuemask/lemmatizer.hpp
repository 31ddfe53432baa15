#pragma once

#include <string>
#include <string_view>

#include "issuemask/pos_tagger.hpp"

namespace issuemask {

/// Dictionary form of a lowercase word for the given part of speech.
/// Nouns lose plural inflection, verbs lose -s/-ed/-ing (irregular forms via
/// table), comparative and superlative adjectives map to the positive.
/// Adverbs and closed-class words are returned unchanged. In hyphenated
/// words only the last segment is inflected ("fine-tuned" → "fine-tune").
std::string lemmatize(std::string_view word, Pos pos);

std::string lemmatize_noun(std::string_view word);
std::string lemmatize_verb(std::string_view word);
std::string lemmatize_adjective(std::string_view word);

/// Base form of an irregular verb form, or empty when the word is not in the table.
std::string_view irregular_verb_base(std::string_view word);

}  // namespace issuemask
