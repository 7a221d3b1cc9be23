'''
pairlink:
Pairwise-learning neural link prediction.
'''

from .pairlink import PairLink
