// ensalign.hpp

// Copyright 2026 The ensalign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Umbrella header for the ensalign library.

#ifndef ENSALIGN_HPP
#define ENSALIGN_HPP

#include "ensalign/acoustic.hpp"
#include "ensalign/aligner.hpp"
#include "ensalign/common.hpp"
#include "ensalign/ensemble.hpp"
#include "ensalign/evaluation.hpp"
#include "ensalign/features.hpp"
#include "ensalign/lexicon.hpp"
#include "ensalign/pipeline.hpp"
#include "ensalign/synthetic.hpp"
#include "ensalign/textgrid.hpp"
#include "ensalign/wav.hpp"

#endif  // ENSALIGN_HPP
