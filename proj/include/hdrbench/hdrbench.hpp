/*
 * Copyright 2026 The hdrbench Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "hdrbench/bitdepth.hpp"
#include "hdrbench/curves.hpp"
#include "hdrbench/digest.hpp"
#include "hdrbench/error.hpp"
#include "hdrbench/measure.hpp"
#include "hdrbench/metrics.hpp"
#include "hdrbench/mock_codec.hpp"
#include "hdrbench/pipeline.hpp"
#include "hdrbench/process.hpp"
#include "hdrbench/report.hpp"
#include "hdrbench/results.hpp"
#include "hdrbench/version.hpp"
#include "hdrbench/yuv_io.hpp"
