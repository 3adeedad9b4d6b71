"""Predictors package initialization."""
from app.predictors.trace import PredictionTrace, empty_trace
from app.predictors.base_predictor import BasePredictor, EvaluationWindow
from app.predictors.kalman import (
    KalmanState,
    initial_kalman_state,
    kalman_gain,
    kf_filter_step,
    kf_predict_step,
    arkf_predict,
    ArkfPredictor,
)
from app.predictors.ar_predictor import ar_predict, ArPredictor

__all__ = [
    'PredictionTrace',
    'empty_trace',
    'BasePredictor',
    'EvaluationWindow',
    'KalmanState',
    'initial_kalman_state',
    'kalman_gain',
    'kf_filter_step',
    'kf_predict_step',
    'arkf_predict',
    'ArkfPredictor',
    'ar_predict',
    'ArPredictor',
]
