#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "patch_triage/syntax_tree.hpp"

namespace patch_triage {

/// A function definition found in a parsed file.
struct FunctionInfo {
  std::string name;
  std::size_t arity = 0;
  NodeId node = kNoNode;
  ByteSpan span;
};

/// Anything that turns source text into a typed, span-annotated ordered tree
/// can be plugged in as a grammar adapter.
class GrammarAdapter {
 public:
  virtual ~GrammarAdapter() = default;

  virtual std::string_view language() const = 0;

  /// Throws ParseError when the text cannot be recovered into a tree.
  virtual SyntaxTree parse(std::string_view text) const = 0;

  /// Function definitions that are direct children of the root, in source
  /// order.
  virtual std::vector<FunctionInfo> functions(const SyntaxTree& tree) const = 0;

  /// Comment-free lexemes of `text`, in order. Never throws; unterminated
  /// constructs are lexed up to the end of the text.
  virtual std::vector<std::string> lexemes(std::string_view text) const = 0;

  /// True when `type` names an identifier-like leaf (used by rename
  /// detection).
  virtual bool is_identifier_type(std::string_view type) const = 0;
};

/// Maps file extensions to grammar adapters.
class GrammarRegistry {
 public:
  void add(std::shared_ptr<const GrammarAdapter> adapter, const std::vector<std::string>& extensions);

  /// Throws GrammarUnavailable naming the extension when nothing matches.
  const GrammarAdapter& for_path(std::string_view path) const;
  const GrammarAdapter* find(std::string_view path) const;

  /// Registry with the shipped C-like adapter bound to .c/.h/.cc/.cpp/.hpp/.cxx/.hxx.
  static GrammarRegistry builtin();

 private:
  std::map<std::string, std::shared_ptr<const GrammarAdapter>, std::less<>> by_extension_;
};

}  // namespace patch_triage
