// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

//! Criterion benchmarks for cprof; see `benches/`.
