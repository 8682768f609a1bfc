// Copyright 2026 The semcodec Authors
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

#include <cstdlib>
#include <filesystem>

namespace semcodec {

/// Location of shipped assets (mode files, text tables, codebooks, corpus).
/// Resolution order: $SEMCODEC_DATA_DIR, the build-time SEMCODEC_DATA_DIR
/// definition, then ./data.
inline std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("SEMCODEC_DATA_DIR"); env && *env) return env;
#ifdef SEMCODEC_DATA_DIR
  return SEMCODEC_DATA_DIR;
#else
  return "data";
#endif
}

}  // namespace semcodec
