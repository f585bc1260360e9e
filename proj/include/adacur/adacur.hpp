#pragma once

#include "adacur/common.hpp"
#include "adacur/rng.hpp"
#include "adacur/linalg.hpp"
#include "adacur/oracle.hpp"
#include "adacur/sketch.hpp"
#include "adacur/rank_est.hpp"
#include "adacur/pivot.hpp"
#include "adacur/oversample.hpp"
#include "adacur/cur.hpp"
#include "adacur/trace.hpp"
#include "adacur/ada.hpp"
#include "adacur/fast.hpp"
#include "adacur/problems.hpp"
#include "adacur/io.hpp"
