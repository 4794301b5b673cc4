#pragma once

#include <bosecount/numerics.hpp>
#include <bosecount/dynamics.hpp>
#include <bosecount/distributions.hpp>
#include <bosecount/oracles.hpp>
