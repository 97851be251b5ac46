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

#include "lineage/error.hpp"

namespace lineage {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kStructural: return "structural";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kTransport: return "transport";
    case ErrorKind::kGeneration: return "generation";
    case ErrorKind::kAdapter: return "adapter";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kCheckpoint: return "checkpoint";
    case ErrorKind::kExhausted: return "exhausted";
    case ErrorKind::kPhase: return "phase";
  }
  return "unknown";
}

}  // namespace lineage
