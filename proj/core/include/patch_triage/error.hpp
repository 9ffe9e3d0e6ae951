#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace patch_triage {

/// Base class of every error raised by the library. The CLI maps these to
/// exit code 2 (data error).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedRecord : public Error {
 public:
  MalformedRecord(std::size_t line_no, const std::string& what)
      : Error("line " + std::to_string(line_no) + ": " + what), line_no_(line_no) {}
  std::size_t line_no() const { return line_no_; }

 private:
  std::size_t line_no_;
};

class DuplicateVulnId : public Error {
 public:
  explicit DuplicateVulnId(const std::string& id)
      : Error("duplicate vuln_id '" + id + "'"), vuln_id_(id) {}
  const std::string& vuln_id() const { return vuln_id_; }

 private:
  std::string vuln_id_;
};

class RepoUnavailable : public Error {
 public:
  explicit RepoUnavailable(const std::string& repo)
      : Error("repository unavailable: " + repo) {}
};

class UnknownCommit : public Error {
 public:
  explicit UnknownCommit(const std::string& hash)
      : Error("unknown commit: " + hash), hash_(hash) {}
  const std::string& hash() const { return hash_; }

 private:
  std::string hash_;
};

class DiffSyntaxError : public Error {
 public:
  DiffSyntaxError(std::size_t line_no, const std::string& what)
      : Error("diff line " + std::to_string(line_no) + ": " + what), line_no_(line_no) {}
  std::size_t line_no() const { return line_no_; }

 private:
  std::size_t line_no_;
};

class GrammarUnavailable : public Error {
 public:
  explicit GrammarUnavailable(const std::string& language)
      : Error("no grammar adapter for '" + language + "'"), language_(language) {}
  const std::string& language() const { return language_; }

 private:
  std::string language_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t byte_offset, const std::string& what)
      : Error("parse error at byte " + std::to_string(byte_offset) + ": " + what),
        byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

class InconsistentMapping : public Error {
 public:
  using Error::Error;
};

class TooFewGroups : public Error {
 public:
  using Error::Error;
};

class MissingGroups : public Error {
 public:
  explicit MissingGroups(const std::string& id)
      : Error("no change groups for vulnerability '" + id + "'"), vuln_id_(id) {}
  const std::string& vuln_id() const { return vuln_id_; }

 private:
  std::string vuln_id_;
};

class EmptyCorpus : public Error {
 public:
  using Error::Error;
};

class RatioInvalid : public Error {
 public:
  using Error::Error;
};

class DuplicateUnitId : public Error {
 public:
  explicit DuplicateUnitId(const std::string& id)
      : Error("duplicate unit_id '" + id + "'") {}
};

class UnknownVulnId : public Error {
 public:
  explicit UnknownVulnId(const std::string& id)
      : Error("unknown vuln_id '" + id + "'") {}
};

class UnclassifiedVuln : public Error {
 public:
  explicit UnclassifiedVuln(const std::string& id)
      : Error("vulnerability '" + id + "' has no classification") {}
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

}  // namespace patch_triage
