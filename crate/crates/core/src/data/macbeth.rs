//! Embedded checker reflectance table: 24 smooth spectral reflectances
//! on the default 380-730 nm at 10 nm grid, in standard row-major patch
//! order (0 = dark skin, 18 = white, 19 = neutral 8, 23 = black).
//!
//! The curves were fitted with a smoothness prior to reproduce the
//! published colorimetric coordinates of the 24 chart patches under D65;
//! see the README for details.

pub const MACBETH_REFLECTANCES: [[f64; 36]; 24] = [
    // dark skin
    [0.0614, 0.0614, 0.0615, 0.0616, 0.0616, 0.0617, 0.0618, 0.0619, 0.0622,
     0.0627, 0.0636, 0.0649, 0.0668, 0.0696, 0.0731, 0.0777, 0.0832, 0.0897,
     0.0971, 0.1053, 0.1143, 0.1237, 0.1337, 0.1439, 0.1542, 0.1648, 0.1754,
     0.1860, 0.1966, 0.2073, 0.2180, 0.2286, 0.2393, 0.2500, 0.2606, 0.2713],
    // light skin
    [0.2238, 0.2253, 0.2269, 0.2285, 0.2300, 0.2316, 0.2333, 0.2350, 0.2371,
     0.2398, 0.2433, 0.2481, 0.2545, 0.2628, 0.2733, 0.2862, 0.3016, 0.3195,
     0.3396, 0.3619, 0.3859, 0.4113, 0.4378, 0.4651, 0.4929, 0.5209, 0.5492,
     0.5775, 0.6059, 0.6343, 0.6628, 0.6912, 0.7196, 0.7481, 0.7765, 0.8050],
    // blue sky
    [0.4434, 0.4266, 0.4099, 0.3932, 0.3765, 0.3598, 0.3431, 0.3264, 0.3099,
     0.2937, 0.2778, 0.2624, 0.2478, 0.2339, 0.2210, 0.2092, 0.1984, 0.1886,
     0.1799, 0.1720, 0.1649, 0.1584, 0.1524, 0.1466, 0.1411, 0.1358, 0.1305,
     0.1252, 0.1200, 0.1148, 0.1095, 0.1043, 0.0991, 0.0939, 0.0887, 0.0835],
    // foliage
    [0.0100, 0.0146, 0.0196, 0.0251, 0.0316, 0.0392, 0.0482, 0.0586, 0.0704,
     0.0831, 0.0963, 0.1093, 0.1215, 0.1321, 0.1407, 0.1467, 0.1499, 0.1502,
     0.1479, 0.1431, 0.1364, 0.1282, 0.1191, 0.1095, 0.0997, 0.0901, 0.0807,
     0.0717, 0.0630, 0.0547, 0.0468, 0.0391, 0.0316, 0.0243, 0.0171, 0.0100],
    // blue flower
    [0.6480, 0.6163, 0.5846, 0.5528, 0.5211, 0.4895, 0.4579, 0.4265, 0.3956,
     0.3655, 0.3368, 0.3100, 0.2856, 0.2642, 0.2461, 0.2316, 0.2210, 0.2141,
     0.2108, 0.2106, 0.2131, 0.2177, 0.2240, 0.2314, 0.2396, 0.2482, 0.2571,
     0.2662, 0.2754, 0.2846, 0.2938, 0.3030, 0.3122, 0.3214, 0.3307, 0.3399],
    // bluish green
    [0.1470, 0.1829, 0.2188, 0.2548, 0.2906, 0.3265, 0.3621, 0.3971, 0.4307,
     0.4621, 0.4898, 0.5125, 0.5289, 0.5376, 0.5378, 0.5289, 0.5111, 0.4850,
     0.4518, 0.4131, 0.3709, 0.3273, 0.2839, 0.2425, 0.2043, 0.1699, 0.1397,
     0.1137, 0.0916, 0.0731, 0.0577, 0.0450, 0.0344, 0.0254, 0.0174, 0.0100],
    // orange
    [0.0289, 0.0318, 0.0348, 0.0378, 0.0407, 0.0437, 0.0469, 0.0504, 0.0547,
     0.0603, 0.0680, 0.0787, 0.0932, 0.1121, 0.1361, 0.1654, 0.2000, 0.2396,
     0.2834, 0.3305, 0.3798, 0.4302, 0.4805, 0.5299, 0.5777, 0.6234, 0.6668,
     0.7080, 0.7470, 0.7840, 0.8193, 0.8532, 0.8859, 0.9178, 0.9490, 0.9800],
    // purplish blue
    [0.6237, 0.5864, 0.5492, 0.5120, 0.4748, 0.4376, 0.4005, 0.3636, 0.3272,
     0.2917, 0.2576, 0.2255, 0.1958, 0.1692, 0.1461, 0.1267, 0.1113, 0.0998,
     0.0919, 0.0873, 0.0854, 0.0858, 0.0879, 0.0911, 0.0952, 0.0997, 0.1045,
     0.1095, 0.1146, 0.1196, 0.1248, 0.1299, 0.1350, 0.1401, 0.1453, 0.1504],
    // moderate red
    [0.2923, 0.2698, 0.2473, 0.2249, 0.2024, 0.1800, 0.1577, 0.1359, 0.1152,
     0.0962, 0.0800, 0.0678, 0.0606, 0.0595, 0.0653, 0.0786, 0.0995, 0.1278,
     0.1628, 0.2036, 0.2491, 0.2979, 0.3488, 0.4008, 0.4530, 0.5048, 0.5558,
     0.6059, 0.6551, 0.7033, 0.7507, 0.7974, 0.8436, 0.8893, 0.9347, 0.9800],
    // purple
    [0.2657, 0.2484, 0.2312, 0.2140, 0.1967, 0.1795, 0.1624, 0.1454, 0.1288,
     0.1127, 0.0976, 0.0839, 0.0719, 0.0619, 0.0544, 0.0495, 0.0473, 0.0477,
     0.0507, 0.0559, 0.0631, 0.0717, 0.0816, 0.0922, 0.1034, 0.1149, 0.1267,
     0.1385, 0.1504, 0.1623, 0.1742, 0.1861, 0.1981, 0.2100, 0.2220, 0.2339],
    // yellow green
    [0.0100, 0.0100, 0.0100, 0.0100, 0.0113, 0.0181, 0.0338, 0.0608, 0.1000,
     0.1503, 0.2087, 0.2717, 0.3346, 0.3934, 0.4439, 0.4831, 0.5088, 0.5203,
     0.5179, 0.5032, 0.4783, 0.4458, 0.4086, 0.3691, 0.3292, 0.2905, 0.2537,
     0.2192, 0.1871, 0.1572, 0.1295, 0.1034, 0.0788, 0.0553, 0.0325, 0.0100],
    // orange yellow
    [0.0100, 0.0100, 0.0108, 0.0132, 0.0181, 0.0262, 0.0382, 0.0546, 0.0757,
     0.1013, 0.1310, 0.1644, 0.2006, 0.2390, 0.2787, 0.3192, 0.3598, 0.4000,
     0.4395, 0.4781, 0.5155, 0.5519, 0.5871, 0.6213, 0.6545, 0.6868, 0.7184,
     0.7492, 0.7794, 0.8091, 0.8383, 0.8671, 0.8956, 0.9239, 0.9520, 0.9800],
    // blue
    [0.5361, 0.5007, 0.4653, 0.4299, 0.3945, 0.3592, 0.3239, 0.2889, 0.2543,
     0.2207, 0.1884, 0.1580, 0.1302, 0.1054, 0.0840, 0.0665, 0.0528, 0.0431,
     0.0369, 0.0340, 0.0339, 0.0360, 0.0398, 0.0448, 0.0505, 0.0568, 0.0633,
     0.0700, 0.0768, 0.0836, 0.0904, 0.0972, 0.1041, 0.1109, 0.1177, 0.1246],
    // green
    [0.0100, 0.0100, 0.0100, 0.0115, 0.0162, 0.0259, 0.0417, 0.0645, 0.0939,
     0.1285, 0.1662, 0.2042, 0.2393, 0.2689, 0.2905, 0.3022, 0.3032, 0.2937,
     0.2748, 0.2484, 0.2167, 0.1825, 0.1483, 0.1161, 0.0877, 0.0638, 0.0449,
     0.0308, 0.0210, 0.0148, 0.0115, 0.0102, 0.0100, 0.0100, 0.0100, 0.0100],
    // red
    [0.1471, 0.1338, 0.1205, 0.1072, 0.0939, 0.0806, 0.0675, 0.0547, 0.0425,
     0.0315, 0.0222, 0.0152, 0.0110, 0.0100, 0.0121, 0.0193, 0.0330, 0.0539,
     0.0821, 0.1173, 0.1585, 0.2047, 0.2547, 0.3074, 0.3619, 0.4174, 0.4734,
     0.5297, 0.5861, 0.6425, 0.6988, 0.7552, 0.8114, 0.8676, 0.9238, 0.9800],
    // yellow
    [0.0100, 0.0100, 0.0100, 0.0100, 0.0100, 0.0124, 0.0221, 0.0427, 0.0761,
     0.1223, 0.1795, 0.2450, 0.3150, 0.3859, 0.4540, 0.5164, 0.5709, 0.6160,
     0.6514, 0.6774, 0.6950, 0.7056, 0.7108, 0.7121, 0.7108, 0.7079, 0.7040,
     0.6996, 0.6949, 0.6901, 0.6852, 0.6803, 0.6754, 0.6705, 0.6655, 0.6606],
    // magenta
    [0.6261, 0.5793, 0.5324, 0.4856, 0.4388, 0.3920, 0.3454, 0.2995, 0.2549,
     0.2126, 0.1740, 0.1405, 0.1137, 0.0948, 0.0849, 0.0849, 0.0949, 0.1147,
     0.1436, 0.1802, 0.2233, 0.2711, 0.3222, 0.3750, 0.4286, 0.4822, 0.5352,
     0.5874, 0.6388, 0.6892, 0.7390, 0.7880, 0.8365, 0.8845, 0.9323, 0.9800],
    // cyan
    [0.3613, 0.3586, 0.3558, 0.3531, 0.3503, 0.3475, 0.3446, 0.3415, 0.3379,
     0.3334, 0.3275, 0.3198, 0.3097, 0.2969, 0.2811, 0.2623, 0.2407, 0.2167,
     0.1911, 0.1647, 0.1386, 0.1136, 0.0906, 0.0703, 0.0531, 0.0392, 0.0284,
     0.0206, 0.0153, 0.0121, 0.0105, 0.0100, 0.0100, 0.0100, 0.0100, 0.0101],
    // white 9.5
    [0.8819, 0.8829, 0.8839, 0.8849, 0.8859, 0.8869, 0.8879, 0.8889, 0.8899,
     0.8908, 0.8918, 0.8926, 0.8934, 0.8942, 0.8948, 0.8954, 0.8958, 0.8961,
     0.8964, 0.8966, 0.8966, 0.8967, 0.8967, 0.8966, 0.8966, 0.8965, 0.8964,
     0.8964, 0.8963, 0.8962, 0.8961, 0.8960, 0.8960, 0.8959, 0.8958, 0.8957],
    // neutral 8
    [0.5786, 0.5785, 0.5784, 0.5783, 0.5782, 0.5781, 0.5780, 0.5779, 0.5778,
     0.5777, 0.5776, 0.5775, 0.5775, 0.5774, 0.5774, 0.5774, 0.5774, 0.5774,
     0.5775, 0.5775, 0.5776, 0.5777, 0.5778, 0.5779, 0.5780, 0.5781, 0.5782,
     0.5783, 0.5784, 0.5785, 0.5786, 0.5787, 0.5788, 0.5790, 0.5791, 0.5792],
    // neutral 6.5
    [0.3521, 0.3521, 0.3520, 0.3520, 0.3519, 0.3518, 0.3518, 0.3517, 0.3517,
     0.3516, 0.3516, 0.3515, 0.3515, 0.3514, 0.3514, 0.3514, 0.3514, 0.3514,
     0.3515, 0.3515, 0.3515, 0.3516, 0.3517, 0.3517, 0.3518, 0.3518, 0.3519,
     0.3520, 0.3520, 0.3521, 0.3522, 0.3522, 0.3523, 0.3524, 0.3524, 0.3525],
    // neutral 5
    [0.1885, 0.1889, 0.1893, 0.1898, 0.1902, 0.1906, 0.1911, 0.1915, 0.1919,
     0.1924, 0.1928, 0.1931, 0.1935, 0.1938, 0.1941, 0.1943, 0.1945, 0.1946,
     0.1947, 0.1947, 0.1948, 0.1948, 0.1947, 0.1947, 0.1946, 0.1946, 0.1945,
     0.1944, 0.1944, 0.1943, 0.1942, 0.1942, 0.1941, 0.1940, 0.1940, 0.1939],
    // neutral 3.5
    [0.0910, 0.0910, 0.0910, 0.0910, 0.0909, 0.0909, 0.0909, 0.0909, 0.0909,
     0.0909, 0.0908, 0.0908, 0.0908, 0.0908, 0.0908, 0.0908, 0.0908, 0.0908,
     0.0908, 0.0908, 0.0908, 0.0909, 0.0909, 0.0909, 0.0909, 0.0909, 0.0909,
     0.0910, 0.0910, 0.0910, 0.0910, 0.0910, 0.0910, 0.0911, 0.0911, 0.0911],
    // black 2
    [0.0344, 0.0344, 0.0344, 0.0344, 0.0344, 0.0344, 0.0344, 0.0344, 0.0344,
     0.0343, 0.0343, 0.0343, 0.0343, 0.0343, 0.0343, 0.0343, 0.0343, 0.0343,
     0.0343, 0.0343, 0.0343, 0.0343, 0.0344, 0.0344, 0.0344, 0.0344, 0.0344,
     0.0344, 0.0344, 0.0344, 0.0344, 0.0344, 0.0344, 0.0344, 0.0344, 0.0344],
];
