#include "lexicon_data.hpp"

namespace capcurate::detail {

const std::string_view kEnglishLexicon = R"LEX(
OTHER a an the this that these those there here it its it's they them their theirs he him his she her hers we us our ours you your yours i me my mine
OTHER and or but nor so yet if then than because while although though whereas unless until since as
OTHER of in on at by for with without within into onto upon from to toward towards about above below under beneath over across through throughout between among around along behind beside besides near inside outside against beyond during after before off out up down via per amid
OTHER is are was were be been being am do does did done doing have has had having will would shall should can could may might must
OTHER not no yes very too also just only even still almost quite rather really somewhat slightly nearly mostly partly fully entirely simply perhaps maybe possibly probably likely
OTHER all any both each every either neither few many much more most other others another several some such same own
OTHER one two three four five six seven eight nine ten eleven twelve twenty thirty hundred thousand million first second third fourth fifth last next
OTHER who whom whose which what where when why how whatever whichever whoever
OTHER together apart away back forward ahead again once twice often always never sometimes usually here there everywhere somewhere nowhere anywhere
OTHER something nothing anything everything someone anyone everyone nobody somebody
NOUN man woman person people child children boy girl baby kid kids adult teenager family friend couple group crowd player worker driver rider officer soldier doctor nurse chef student teacher artist musician dancer athlete tourist customer vendor farmer fisherman
NOUN face head hair eye eyes nose mouth lip lips ear ears hand hands arm arms leg legs foot feet finger fingers shoulder back neck body skin beard mustache smile expression
NOUN shirt t-shirt jacket coat dress skirt pants jeans shorts suit tie hat cap helmet scarf glove gloves shoe shoes boot boots sneaker sneakers sock socks glasses sunglasses uniform sweater hoodie vest apron backpack bag handbag purse wallet watch necklace bracelet ring earring belt
NOUN dog cat horse cow sheep goat pig chicken duck goose bird eagle owl parrot pigeon seagull fish shark whale dolphin turtle frog snake lizard insect butterfly bee spider elephant giraffe zebra lion tiger bear monkey deer rabbit squirrel mouse fox wolf camel kangaroo penguin animal pet puppy kitten
NOUN tree trees plant plants flower flowers grass leaf leaves branch trunk bush shrub forest woods garden lawn field meadow farm crop crops rose tulip sunflower cactus palm pine oak moss vine
NOUN sky cloud clouds sun moon star stars rain snow fog mist storm wind weather sunset sunrise dawn dusk night day morning afternoon evening light shadow shadows reflection horizon rainbow
NOUN mountain mountains hill hills valley river lake sea ocean beach shore coast wave waves sand rock rocks stone stones cliff island desert canyon waterfall stream pond water ice glacier volcano cave
NOUN city town village street road highway sidewalk path trail bridge tunnel building buildings house home apartment tower skyscraper church temple castle palace museum school hospital office shop store market mall restaurant cafe bar hotel station airport stadium park playground square plaza alley
NOUN car cars truck bus van taxi bicycle bike motorcycle scooter train tram subway boat ship yacht airplane plane jet helicopter vehicle wheel wheels tire engine traffic parking lane crosswalk sign signs signal pole lamp streetlight fence gate wall walls roof window windows door doors balcony stairs staircase step steps floor ceiling corner entrance
NOUN room kitchen bedroom bathroom living hallway table tables chair chairs sofa couch bed desk shelf shelves cabinet drawer counter sink stove oven refrigerator fridge microwave toilet bathtub shower mirror curtain curtains rug carpet pillow blanket lamp vase clock frame painting picture poster photo photograph
NOUN food meal breakfast lunch dinner plate plates bowl bowls cup cups mug glass glasses bottle bottles jar can fork knife spoon chopsticks napkin tray pot pan kettle
NOUN pizza burger sandwich salad soup rice noodle noodles bread cake cookie pie donut fruit fruits apple apples banana bananas orange oranges lemon grape grapes strawberry strawberries cherry watermelon vegetable vegetables tomato tomatoes potato potatoes carrot carrots onion broccoli corn meat chicken beef pork egg eggs cheese coffee tea juice milk wine beer drink drinks dessert sauce
NOUN phone smartphone laptop computer screen monitor keyboard tablet camera television tv remote speaker headphones cable device machine robot
NOUN book books paper page pages newspaper magazine letter letters card cards box boxes package bag basket ball balls toy toys game kite umbrella flag flags banner map logo label text word words number numbers title caption font headline
NOUN frisbee skateboard surfboard snowboard ski skis racket bat glove net goal court pitch track pool
NOUN scene image view background foreground center middle side sides top bottom edge left right front area space surface line lines shape shapes pattern patterns design texture color colors detail details part parts piece pieces object objects item items set row rows stack pile
NOUN atmosphere mood style lighting composition perspective angle focus contrast tone
NOUN time moment event party wedding festival concert game match race show performance ceremony meeting
NOUN chart graph diagram table document form receipt invoice menu screenshot website interface button icon
NOUN statue sculpture monument fountain bench tent umbrella chair swing slide
NOUN metal wood wooden glass plastic fabric cloth leather brick concrete marble steel gold silver
VERB be stand sit lie walk run jump climb ride drive fly swim float sail hold carry wear look watch stare see gaze smile laugh talk speak sing dance play eat drink cook cut read write draw paint hang lean rest sleep wait push pull throw catch kick hit reach point touch hug kiss grab pick place put set lay cover fill surround line face overlook display show feature depict contain include appear seem remain stretch extend rise fall grow bloom shine glow reflect cast light burn pour serve sell buy work build fix clean wash open close enter leave cross pass follow lead move turn approach gather park travel visit explore celebrate perform pose prepare arrange decorate hold use type label mark sign print frame border connect support
VERB crouch kneel bend squat wave clap shake nod frown cry shout yell whisper listen hear smell taste feel think know believe want need like love enjoy
ADJ red orange yellow green blue purple pink brown black white gray grey beige golden silver colorful bright dark pale light vivid vibrant muted pastel neon
ADJ big large huge giant enormous massive small little tiny tall short long wide narrow thick thin high low deep shallow flat round square rectangular circular oval triangular curved straight
ADJ old young new ancient modern vintage classic antique traditional contemporary rustic
ADJ beautiful pretty lovely gorgeous stunning ugly cute handsome elegant graceful charming attractive
ADJ happy sad angry calm quiet loud busy crowded empty full open closed clean dirty messy neat tidy wet dry hot cold warm cool fresh ripe rotten
ADJ sunny cloudy rainy snowy foggy windy clear hazy stormy overcast
ADJ soft hard smooth rough sharp blurry blurred detailed simple complex plain fancy ornate decorative
ADJ heavy light fast slow strong weak rich poor cheap expensive
ADJ natural urban rural wild domestic outdoor indoor public private local foreign
ADJ main central distant nearby visible hidden various different similar multiple single double entire whole other several
ADJ wooden metallic glossy shiny matte transparent translucent reflective sparkling glowing
ADJ striped spotted checkered patterned floral plaid polka dotted
ADJ serene peaceful tranquil lively cozy dramatic majestic picturesque scenic
ADJ green-leafed snow-capped black-and-white
ADJ delicious tasty sweet sour salty spicy savory
ADJ furry fluffy hairy bald curly wavy
ADJ friendly curious playful alert focused relaxed tired excited
ADJ good bad great nice fine perfect important interesting unusual strange common rare
ADJ dense sparse rich lush barren
ADJ blank written printed handwritten digital
)LEX";

const std::string_view kEnglishIrregularVerbs = R"LEX(
be was been
stand stood stood
sit sat sat
lie lay lain
run ran run
ride rode ridden
drive drove driven
fly flew flown
swim swam swum
hold held held
wear wore worn
see saw seen
speak spoke spoken
sing sang sung
eat ate eaten
drink drank drunk
cut cut cut
read read read
write wrote written
draw drew drawn
hang hung hung
sleep slept slept
throw threw thrown
catch caught caught
hit hit hit
put put put
set set set
lay laid laid
show showed shown
rise rose risen
fall fell fallen
grow grew grown
shine shone shone
cast cast cast
burn burnt burnt
sell sold sold
buy bought bought
build built built
leave left left
lead led led
bend bent bent
shake shook shaken
feel felt felt
think thought thought
know knew known
hear heard heard
light lit lit
)LEX";

const std::string_view kChineseLexicon = R"LEX(
OTHER 的 了 和 与 及 或 在 是 有 也 都 就 而 但 又 还 很 非常 一个 一只 一位 一些 这 那 这个 那个 这些 那些 其 它 他 她 他们 她们 我们 你们 中 上 下 里 旁 前 后 左 右 着 被 把 从 向 对 为 以 之 等 其中 以及 并且 同时 一 二 三 四 五 六 七 八 九 十 两 多 个 张 条 只 位 座 辆 片 些
NOUN 图片 图像 照片 画面 场景 背景 前景 中央 中心 角落 边缘 顶部 底部 左侧 右侧 表面 细节 部分 区域 空间 整体 氛围 光线 阴影 倒影 色调 构图 视角 风格
NOUN 人 男人 女人 男子 女子 男孩 女孩 孩子 儿童 婴儿 老人 人们 人群 游客 学生 老师 工人 司机 厨师 医生 运动员 家庭 朋友 情侣
NOUN 头发 脸 面部 眼睛 鼻子 嘴巴 耳朵 手 手臂 腿 脚 身体 表情 微笑
NOUN 衣服 衬衫 外套 夹克 裙子 裤子 帽子 鞋子 眼镜 背包 包 手表 项链
NOUN 狗 猫 马 牛 羊 鸟 鱼 鸭子 熊猫 老虎 狮子 大象 动物 宠物
NOUN 树 树木 树叶 草 草地 花 花朵 植物 森林 花园 田野 农田
NOUN 天空 云 云朵 太阳 月亮 星星 雨 雪 雾 日落 日出 夜晚 白天 早晨 傍晚 阳光 彩虹
NOUN 山 山脉 山峰 河 河流 湖 湖泊 海 大海 海洋 海滩 沙滩 岩石 石头 水 瀑布 岛屿 沙漠
NOUN 城市 街道 道路 马路 公路 桥 桥梁 建筑 建筑物 房子 房屋 大楼 高楼 塔 寺庙 教堂 城堡 学校 医院 商店 市场 餐厅 咖啡馆 酒店 车站 机场 公园 广场
NOUN 汽车 车辆 卡车 公交车 自行车 摩托车 火车 船 飞机 轮子 交通 标志 路灯 围栏 大门 墙 墙壁 屋顶 窗户 门 楼梯 地板 天花板
NOUN 房间 厨房 卧室 客厅 浴室 桌子 椅子 沙发 床 书架 柜子 镜子 窗帘 地毯 灯 花瓶 时钟 画 海报
NOUN 食物 饭菜 早餐 午餐 晚餐 盘子 碗 杯子 瓶子 筷子 勺子 叉子 刀 米饭 面条 面包 蛋糕 水果 苹果 香蕉 橙子 蔬菜 肉 鸡蛋 咖啡 茶 牛奶
NOUN 手机 电脑 屏幕 键盘 相机 电视 书 书本 纸 文字 文本 标题 字体 数字 标签 图表 表格 文档 菜单 按钮 图标 标识 旗帜 球
VERB 站 站着 坐 坐着 躺 走 走路 跑 奔跑 跳 爬 骑 驾驶 飞 飞翔 游泳 漂浮 拿 拿着 握 举 穿 穿着 戴 戴着 看 看着 注视 望 笑 微笑着 说话 唱歌 跳舞 玩 玩耍 吃 喝 做饭 切 读 写 画 挂 挂着 靠 休息 睡觉 等待 推 拉 扔 抓 踢 指 摸 拥抱 放 放置 覆盖 包围 排列 展示 显示 呈现 描绘 包含 出现 延伸 生长 盛开 照耀 反射 出售 购买 工作 建造 清洗 打开 关闭 进入 离开 穿过 跟随 移动 转 旅行 参观 庆祝 表演 摆姿势 准备 装饰 使用 连接 支撑 位于 点缀 映衬 环绕 矗立
ADJ 红色 橙色 黄色 绿色 蓝色 紫色 粉色 棕色 黑色 白色 灰色 金色 银色 彩色 鲜艳 明亮 昏暗 暗 浅 深 柔和
ADJ 大 小 高 矮 长 短 宽 窄 厚 薄 深邃 圆形 方形 巨大 微小 高大
ADJ 古老 现代 传统 复古 新 旧 年轻
ADJ 美丽 漂亮 可爱 优雅 壮观 宁静 安静 热闹 繁忙 拥挤 空旷 干净 整洁 凌乱 温暖 寒冷 凉爽 新鲜 清晰 模糊 详细 简单 复杂 精致 光滑 粗糙 柔软 坚硬 茂密 稀疏 晴朗 多云 自然 城市化 户外 室内 主要 不同 各种 多个 清澈 透明 闪亮 舒适 生动 壮丽 迷人
)LEX";

}  // namespace capcurate::detail
