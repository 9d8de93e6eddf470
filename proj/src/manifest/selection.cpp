/*
 * Copyright 2026 The evalmesh Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "evalmesh/manifest/selection.hpp"

#include "evalmesh/common/error.hpp"
#include "evalmesh/common/strings.hpp"

namespace evalmesh::manifest {

std::string select_container(const ContainerMap& map, Architecture arch,
                             Accelerator accel) {
  auto it = map.find(arch);
  if (it == map.end()) {
    throw Error(ErrorCode::kNoContainerForArch,
                "no container declared for " + std::string(to_string(arch)));
  }
  const ContainerEntry& entry = it->second;
  if (entry.single) return *entry.single;
  const auto& choice = accel == Accelerator::kGpu ? entry.gpu : entry.cpu;
  if (!choice) {
    throw Error(ErrorCode::kNoContainerForArch,
                "no " + std::string(to_string(accel)) + " container declared for " +
                    std::string(to_string(arch)));
  }
  return *choice;
}

std::string manifest_key(const Manifest& m) {
  if (m.name.empty() || !m.version || !m.framework || m.framework->name.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "manifest identity needs name, version and framework.name");
  }
  // '/' separates components; percent-escape it (and '%', whitespace) so the
  // key stays injective.
  auto clean = [](const std::string& s) {
    std::string out;
    for (char ch : to_lower(trim(s))) {
      if (ch == '/' || ch == '%' || ch == ' ' || ch == '\t') {
        static constexpr char kHex[] = "0123456789abcdef";
        out += '%';
        out += kHex[(static_cast<unsigned char>(ch) >> 4) & 15];
        out += kHex[static_cast<unsigned char>(ch) & 15];
      } else {
        out += ch;
      }
    }
    return out;
  };
  return clean(m.framework->name) + "/" + clean(m.name) + "/" +
         m.version->to_string();
}

}  // namespace evalmesh::manifest
