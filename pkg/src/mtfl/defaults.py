"""
Default values for the pipeline.
"""

# observation window and task structure
WINDOW = 42
GROUP_SIZE = 7
SUMMARY_DAYS = 7
N_PHASES = 3

# experiment protocol
MODELS = ('ridge', 'lasso', 'fsgl')
N_RUNS = 100
SEED = 2020
TEST_FRACTION = 0.1
CV_FOLDS = 5

# lambda grid, log-spaced
GRID_POINTS = 5
GRID_LOW = 1e-3
GRID_HIGH = 1e1

# solver options
TOL = 1e-6
MAX_ITER = 10000
POWER_ITER = 50
POWER_TOL = 1e-6
BACKTRACK_FACTOR = 2.0
KKT_TOL = 1e-6

# hybrid feature selection
SELECT_M = 15
RFE_ALPHA = 1.0
FOREST_TREES = 200
FOREST_MAX_DEPTH = 4
FOREST_MIN_LEAF = 2
FOREST_MAX_FEATURES = 'sqrt'
THIRD_WRAPPER = 'forest'
BOOSTING_STAGES = 100
BOOSTING_LEARNING_RATE = 0.1

# outlier filter
OUTLIER_IQR_FACTOR = 3.0

# voting
VOTE_EPS = 1e-6
TOP_P = 5

# SEIR simulation and augmentation
SEIR_BETA = 0.6
SEIR_SIGMA = 0.2
SEIR_GAMMA = 0.1
SEIR_MU = 0.03
SEIR_POPULATION = 1e6
SEIR_E0 = 0.0
SEIR_I0 = 10.0
SEIR_DT = 0.1
AUGMENT_COUNT = 0
AUGMENT_JITTER = 0.05
AUGMENT_BETA_SPREAD = 0.25

# report output
HEATMAP_SCALE = 'magnitude'
FLOAT_FORMAT = '%.10g'
SVG_HASH_SALT = 'mtfl'

# environment variable capping worker count
THREADS_ENV = 'MTFL_THREADS'
