#pragma once

#include <stdexcept>
#include <string>

namespace egoharness {

/// Base class for all harness errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

// scenario-store

class SchemaError : public Error {
  public:
    explicit SchemaError(const std::string &msg) : Error("schema error: " + msg) {}
};

class IntegrityError : public Error {
  public:
    explicit IntegrityError(const std::string &msg) : Error("integrity error: " + msg) {}
};

class ScenarioMismatch : public Error {
  public:
    explicit ScenarioMismatch(const std::string &msg) : Error("scenario mismatch: " + msg) {}
};

// tool-engine

class DuplicateTool : public Error {
  public:
    explicit DuplicateTool(const std::string &name) : Error("duplicate tool: " + name) {}
};

// agent-adapter / user-simulator backends

class BackendError : public Error {
  public:
    explicit BackendError(const std::string &msg) : Error(msg) {}
};

/// Network-level failure; retried by the adapter.
class TransportError : public BackendError {
  public:
    explicit TransportError(const std::string &msg) : BackendError("transport error: " + msg) {}
};

/// The backend answered, but not in the shape the profile expects.
class ProtocolError : public BackendError {
  public:
    explicit ProtocolError(const std::string &msg) : BackendError("protocol error: " + msg) {}
};

class PreconditionError : public Error {
  public:
    explicit PreconditionError(const std::string &msg) : Error("precondition violated: " + msg) {}
};

class MalformedEvaluation : public Error {
  public:
    explicit MalformedEvaluation(const std::string &msg) : Error("malformed evaluation: " + msg) {}
};

// validation-metrics

class EmptyDataset : public Error {
  public:
    EmptyDataset() : Error("empty dataset") {}
};

class GroundTruthInvalid : public Error {
  public:
    explicit GroundTruthInvalid(const std::string &msg) : Error("ground truth invalid: " + msg) {}
};

// harness-cli

class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string &msg) : Error("config error: " + msg) {}
};

class TaskError : public Error {
  public:
    explicit TaskError(const std::string &msg) : Error("task error: " + msg) {}
};

class CorruptLog : public Error {
  public:
    explicit CorruptLog(const std::string &msg) : Error("corrupt log: " + msg) {}
};

} // namespace egoharness
