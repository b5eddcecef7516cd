from .classifier import ClassifierParams, OffensiveClassifier, classify, classify_backward, init_params
from .encoder import encoder_backward, encoder_forward
from .poolers import AttentionPoolerParams, attention_pool, attention_pool_backward, mean_pool, mean_pool_backward
