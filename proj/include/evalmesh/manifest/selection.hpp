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

#pragma once

#include <string>

#include "evalmesh/manifest/manifest.hpp"

namespace evalmesh::manifest {

// Image for (arch, accel). A single-image arch entry serves both
// accelerators. Throws Error(kNoContainerForArch) when the map has no usable
// entry.
std::string select_container(const ContainerMap& map, Architecture arch,
                             Accelerator accel);

// "framework/name/version", lower-cased. Throws Error(kInvalidArgument) when
// the identity fields are missing.
std::string manifest_key(const Manifest& m);

}  // namespace evalmesh::manifest
