from .config import PipelineConfig
from .dataset import Dataset
