"""
anred 后端：自动机网络模型、因果分析、目标约简与可达性检查
"""
