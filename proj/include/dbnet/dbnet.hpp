// Copyright (c) 2026 dbnet developers.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dbnet/balance.hpp"
#include "dbnet/errors.hpp"
#include "dbnet/linalg.hpp"
#include "dbnet/network.hpp"
#include "dbnet/numerics.hpp"
#include "dbnet/pathwise.hpp"
#include "dbnet/philox.hpp"
#include "dbnet/rational.hpp"
#include "dbnet/report.hpp"
#include "dbnet/stability.hpp"
#include "dbnet/stochastic.hpp"
#include "dbnet/tolerances.hpp"
#include "dbnet/topology.hpp"
