"""Active-inference agent built from Hebbian sparse-coding ensembles."""
from hebbaif.agent import HebbianAIFAgent, plan_and_act
from hebbaif.config import ExperimentConfig, load_config

__all__ = ["ExperimentConfig", "HebbianAIFAgent", "load_config", "plan_and_act"]
__version__ = "0.1.0"
