from dksel.models.pool import EmbeddingMatrix, QueryContext
from dksel.models.params import SelectParams, SelectionVector
from dksel.models.solver import DirectionalQuadratic, SwapDirection, FwState, StepRecord
