from dksel.client import SelectClient
from dksel.classes import SolveReport, VertexCertificate
from dksel.errors import DkselError, SolverError, ValidationError
from dksel.fileio import load_embeddings, write_embeddings
from dksel.models import EmbeddingMatrix, QueryContext, SelectParams
from dksel.selectors import run_selector
from dksel.settings import Settings

__version__ = '0.1.0'
