// Copyright 2026 The Lineage Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lineage {

// Classification used by the CLI to pick exit codes and by the orchestrator
// to decide whether a failure is retriable.
enum class ErrorKind {
  kStructural,   // tree shape violations: unknown ids, duplicates
  kValidation,   // out-of-range inputs to pure functions
  kFormat,       // unparseable detector / planner / reflection replies
  kTransport,    // network or timeout failures, retriable
  kGeneration,   // planner or synthesizer produced nothing usable
  kAdapter,      // static analyzer adapter failed to run
  kConfig,       // campaign configuration schema violations
  kCheckpoint,   // missing or inconsistent checkpoint files
  kExhausted,    // no active node left to sample
  kPhase,        // verifier phase could not complete
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class StructuralError : public Error {
 public:
  explicit StructuralError(const std::string& m) : Error(ErrorKind::kStructural, m) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& m) : Error(ErrorKind::kValidation, m) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& m) : Error(ErrorKind::kFormat, m) {}
};

class TransportError : public Error {
 public:
  explicit TransportError(const std::string& m) : Error(ErrorKind::kTransport, m) {}
};

class GenerationError : public Error {
 public:
  explicit GenerationError(const std::string& m) : Error(ErrorKind::kGeneration, m) {}
};

class AdapterError : public Error {
 public:
  // tool_failed distinguishes "the analyzer did not run" from a parse problem
  // on output it did produce.
  AdapterError(const std::string& m, bool tool_failed)
      : Error(ErrorKind::kAdapter, m), tool_failed_(tool_failed) {}
  bool tool_failed() const noexcept { return tool_failed_; }

 private:
  bool tool_failed_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error(ErrorKind::kConfig, m) {}
};

class CheckpointError : public Error {
 public:
  explicit CheckpointError(const std::string& m) : Error(ErrorKind::kCheckpoint, m) {}
};

class ExhaustedError : public Error {
 public:
  explicit ExhaustedError(const std::string& m) : Error(ErrorKind::kExhausted, m) {}
};

class PhaseError : public Error {
 public:
  explicit PhaseError(const std::string& m) : Error(ErrorKind::kPhase, m) {}
};

}  // namespace lineage
