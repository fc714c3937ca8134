#pragma once

#include "newton/adaptive_adc.hpp"
#include "newton/arch.hpp"
#include "newton/arch_config.hpp"
#include "newton/bitslice.hpp"
#include "newton/error.hpp"
#include "newton/evaluator.hpp"
#include "newton/karatsuba.hpp"
#include "newton/mapper.hpp"
#include "newton/matrix.hpp"
#include "newton/network.hpp"
#include "newton/report.hpp"
#include "newton/strassen.hpp"
#include "newton/verify.hpp"
