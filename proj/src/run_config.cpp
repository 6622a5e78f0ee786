// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0
