#pragma once

// Umbrella header. The HTTP label oracle (droidlens/dataset/oracle.hpp) and the
// CLI (droidlens/cli/app.hpp) are included separately.

#include "droidlens/clustering/agglomerative.hpp"
#include "droidlens/clustering/assignment.hpp"
#include "droidlens/clustering/birch.hpp"
#include "droidlens/clustering/dbscan.hpp"
#include "droidlens/clustering/gmm.hpp"
#include "droidlens/clustering/kmeans.hpp"
#include "droidlens/clustering/validity.hpp"
#include "droidlens/core/error.hpp"
#include "droidlens/core/matrix.hpp"
#include "droidlens/core/random.hpp"
#include "droidlens/dataset/consensus.hpp"
#include "droidlens/dataset/csv.hpp"
#include "droidlens/dataset/dataset.hpp"
#include "droidlens/dataset/synth.hpp"
#include "droidlens/dex/dex_file.hpp"
#include "droidlens/dex/histogram.hpp"
#include "droidlens/dex/leb128.hpp"
#include "droidlens/dex/opcodes.hpp"
#include "droidlens/eval/cluster_compare.hpp"
#include "droidlens/eval/kfold.hpp"
#include "droidlens/eval/metrics.hpp"
#include "droidlens/eval/pipeline.hpp"
#include "droidlens/eval/report.hpp"
#include "droidlens/learn/classifier.hpp"
#include "droidlens/learn/classifier_spec.hpp"
#include "droidlens/learn/model_io.hpp"
#include "droidlens/learn/smote.hpp"
