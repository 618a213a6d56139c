# 配置模块
