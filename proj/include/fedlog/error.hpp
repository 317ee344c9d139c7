#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fedlog {

/// Base for every error raised by the engine. `stage()` names the pipeline
/// stage that produced it so service responses can attribute failures.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& message)
      : std::runtime_error(message), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Syntax error with a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : Error("parse", "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A head variable that does not occur in the body.
class SafetyError : public Error {
 public:
  explicit SafetyError(const std::string& variable)
      : Error("parse", "unsafe query: head variable " + variable + " does not occur in the body"),
        variable_(variable) {}

  const std::string& variable() const noexcept { return variable_; }

 private:
  std::string variable_;
};

class OntologyError : public Error {
 public:
  explicit OntologyError(const std::string& message) : Error("ontology", message) {}
};

class RuleError : public Error {
 public:
  explicit RuleError(const std::string& message) : Error("rules", message) {}
};

class ReasoningError : public Error {
 public:
  enum class Kind { UnknownPredicate, ArityMismatch, DomainViolation };

  ReasoningError(Kind kind, const std::string& message) : Error("reason", message), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class RewriteError : public Error {
 public:
  enum class Kind { UnmappedPredicate, ArityMismatch, UnificationFailure };

  RewriteError(Kind kind, const std::string& message) : Error("rewrite", message), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class CatalogError : public Error {
 public:
  explicit CatalogError(const std::string& message) : Error("catalog", message) {}
};

class PlanError : public Error {
 public:
  explicit PlanError(const std::string& message) : Error("plan", message) {}
};

/// Failure inside a source adapter, tagged with the source and sub-query.
class AdapterError : public Error {
 public:
  AdapterError(std::string source_id, int subquery_id, const std::string& message)
      : Error("execute", "source " + source_id + (subquery_id > 0 ? ", sub-query " + std::to_string(subquery_id) : "") +
                             ": " + message),
        source_id_(std::move(source_id)),
        subquery_id_(subquery_id) {}

  const std::string& source_id() const noexcept { return source_id_; }
  int subquery_id() const noexcept { return subquery_id_; }

 private:
  std::string source_id_;
  int subquery_id_;
};

class WorkflowError : public Error {
 public:
  explicit WorkflowError(const std::string& message) : Error("workflow", message) {}
};

class TemplateError : public Error {
 public:
  explicit TemplateError(const std::string& message) : Error("template", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

}  // namespace fedlog
