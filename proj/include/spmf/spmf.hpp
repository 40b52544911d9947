#pragma once

#include "spmf/augment.hpp"
#include "spmf/baseline.hpp"
#include "spmf/encoding.hpp"
#include "spmf/error.hpp"
#include "spmf/image.hpp"
#include "spmf/ingest.hpp"
#include "spmf/pipeline.hpp"
#include "spmf/png.hpp"
#include "spmf/rng.hpp"
#include "spmf/skeleton.hpp"
