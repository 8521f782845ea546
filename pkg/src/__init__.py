"""
Similarity prototype toolkit: semantic statistics, prototypes, label softening and contrastive training
"""
