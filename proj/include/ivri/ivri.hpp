#pragma once

#include "ivri/errors.hpp"
#include "ivri/jet.hpp"
#include "ivri/noise.hpp"
#include "ivri/model.hpp"
#include "ivri/hodgkin_huxley.hpp"
#include "ivri/trajectory.hpp"
#include "ivri/hormander.hpp"
#include "ivri/ode.hpp"
#include "ivri/random.hpp"
#include "ivri/sde.hpp"
#include "ivri/orbit.hpp"
#include "ivri/control.hpp"
#include "ivri/positivity.hpp"
#include "ivri/io.hpp"
