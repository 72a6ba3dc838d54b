#pragma once

#include "transferlab/algebra.hpp"
#include "transferlab/analyze.hpp"
#include "transferlab/bh.hpp"
#include "transferlab/bimodule.hpp"
#include "transferlab/commutative.hpp"
#include "transferlab/document.hpp"
#include "transferlab/eig.hpp"
#include "transferlab/errors.hpp"
#include "transferlab/matrix.hpp"
#include "transferlab/operator_map.hpp"
#include "transferlab/qr.hpp"
#include "transferlab/rng.hpp"
#include "transferlab/transfer.hpp"
