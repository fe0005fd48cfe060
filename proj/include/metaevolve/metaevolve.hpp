#pragma once

#include "metaevolve/core.hpp"
#include "metaevolve/descriptor.hpp"
#include "metaevolve/engine.hpp"
#include "metaevolve/event_log.hpp"
#include "metaevolve/meta.hpp"
#include "metaevolve/rng.hpp"
#include "metaevolve/solution_gen.hpp"
#include "metaevolve/strategy.hpp"
#include "metaevolve/tasks.hpp"
