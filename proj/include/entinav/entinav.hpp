#ifndef ENTINAV_ENTINAV_HPP
#define ENTINAV_ENTINAV_HPP

#include "entinav/core.hpp"
#include "entinav/edm.hpp"
#include "entinav/engine.hpp"
#include "entinav/errors.hpp"
#include "entinav/fitting.hpp"
#include "entinav/geometry.hpp"
#include "entinav/io.hpp"
#include "entinav/nav.hpp"
#include "entinav/rvo.hpp"
#include "entinav/scenario.hpp"
#include "entinav/sim.hpp"
#include "entinav/study.hpp"

#endif
