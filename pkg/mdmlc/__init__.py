# mdmlc - 面向 IoT 与嵌入式 ML 的建模语言编译工具链
__version__ = "1.0.1"
