#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "patch_triage/grammar.hpp"

namespace patch_triage {

enum class TokenKind { Identifier, Keyword, Number, String, Char, Punct, Preproc };

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Splits C-like source into tokens. Comments are dropped; a preprocessor
/// directive (including backslash continuations) becomes one Preproc token.
/// With `strict`, unterminated comments/literals throw ParseError; otherwise
/// they run to the end of the text.
std::vector<Token> tokenize_c(std::string_view text, bool strict = true);

/// Grammar adapter for a pragmatic subset of C: declarations, function
/// definitions, struct/union/enum specifiers, all statements and the full
/// expression precedence ladder. Unparseable statements or top-level items
/// become `ERROR` nodes; unbalanced brackets raise ParseError.
///
/// String and char literal labels are normalized to "<LIT>"; numeric
/// literals keep their spelling.
class CLikeGrammar final : public GrammarAdapter {
 public:
  std::string_view language() const override { return "c"; }
  SyntaxTree parse(std::string_view text) const override;
  std::vector<FunctionInfo> functions(const SyntaxTree& tree) const override;
  std::vector<std::string> lexemes(std::string_view text) const override;
  bool is_identifier_type(std::string_view type) const override;
};

}  // namespace patch_triage
