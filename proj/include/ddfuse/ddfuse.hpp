// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ddfuse/baselines.hpp"
#include "ddfuse/checkpoint.hpp"
#include "ddfuse/config.hpp"
#include "ddfuse/conv.hpp"
#include "ddfuse/discriminator.hpp"
#include "ddfuse/errors.hpp"
#include "ddfuse/fusion.hpp"
#include "ddfuse/image_io.hpp"
#include "ddfuse/losses.hpp"
#include "ddfuse/metrics.hpp"
#include "ddfuse/model.hpp"
#include "ddfuse/ops.hpp"
#include "ddfuse/optim.hpp"
#include "ddfuse/random.hpp"
#include "ddfuse/runtime.hpp"
#include "ddfuse/tensor.hpp"
#include "ddfuse/trainer.hpp"
