#pragma once

// Everything except the HTTP layer (service.hpp), which pulls in httplib.
#include "ulf/checker.hpp"
#include "ulf/corpus.hpp"
#include "ulf/deindex.hpp"
#include "ulf/diagnostic.hpp"
#include "ulf/elsmatch.hpp"
#include "ulf/expr.hpp"
#include "ulf/infer.hpp"
#include "ulf/macros.hpp"
#include "ulf/model.hpp"
#include "ulf/postproc.hpp"
#include "ulf/reader.hpp"
#include "ulf/scoper.hpp"
#include "ulf/types.hpp"
