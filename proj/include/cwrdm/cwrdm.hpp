#pragma once

#include "cwrdm/io.hpp"
#include "cwrdm/marginals.hpp"
#include "cwrdm/partitions.hpp"
#include "cwrdm/rational.hpp"
#include "cwrdm/rdm.hpp"
#include "cwrdm/relations.hpp"
#include "cwrdm/state_space.hpp"
#include "cwrdm/weight_model.hpp"
